#include "mdiqkd/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "mdiqkd/errors.hpp"

namespace mdiqkd {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawEntry {
    std::string value;
    int line = 0;
    bool consumed = false;
};

struct RawConfig {
    std::map<std::string, RawEntry> entries;  // "section.key"
    std::map<std::string, int> sections;      // section -> first line

    bool has_section(const std::string& s) const { return sections.count(s) > 0; }

    const RawEntry* find(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        it->second.consumed = true;
        return &it->second;
    }
};

RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line = line.substr(0, cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            raw.sections.emplace(section, line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key '" + key + "' outside any [section]");
        const std::string full = section + "." + key;
        if (!raw.entries.emplace(full, RawEntry{value, line_no, false}).second)
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                              full + "'");
    }
    return raw;
}

[[noreturn]] void bad_value(const std::string& key, const RawEntry& e, const char* want) {
    throw ConfigError("config line " + std::to_string(e.line) + ": key '" + key + "': expected " +
                      want + ", got '" + e.value + "'");
}

double parse_double(const std::string& key, const RawEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') bad_value(key, e, "a number");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const RawEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || e.value.find('-') != std::string::npos)
        bad_value(key, e, "an unsigned integer");
    return v;
}

bool parse_bool(const std::string& key, const RawEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    bad_value(key, e, "true or false");
}

// Either a comma list "a,b,c" or an inclusive range "start:step:stop".
std::vector<double> parse_grid(const std::string& key, const RawEntry& e) {
    std::vector<double> out;
    if (e.value.find(':') != std::string::npos) {
        double start = 0, step = 0, stop = 0;
        char* end = nullptr;
        const char* s = e.value.c_str();
        start = std::strtod(s, &end);
        if (end == s || *end != ':') bad_value(key, e, "start:step:stop");
        s = end + 1;
        step = std::strtod(s, &end);
        if (end == s || *end != ':') bad_value(key, e, "start:step:stop");
        s = end + 1;
        stop = std::strtod(s, &end);
        if (end == s || *end != '\0') bad_value(key, e, "start:step:stop");
        if (!(step > 0.0) || stop < start) bad_value(key, e, "a range with step > 0 and stop >= start");
        const double slack = 1e-9 * std::max(1.0, std::abs(stop));
        for (int i = 0;; ++i) {
            const double v = start + i * step;
            if (v > stop + slack) break;
            out.push_back(v);
        }
    } else {
        std::istringstream ss(e.value);
        std::string field;
        while (std::getline(ss, field, ',')) {
            RawEntry fe{trim(field), e.line, true};
            out.push_back(parse_double(key, fe));
        }
    }
    if (out.empty()) bad_value(key, e, "a nonempty list or range");
    return out;
}

void parse_source_section(RawConfig& raw, const std::string& section, SourceSpec& spec) {
    if (const RawEntry* e = raw.find(section + ".type")) {
        if (e->value != "coherent" && e->value != "thermal" && e->value != "custom")
            bad_value(section + ".type", *e, "coherent, thermal or custom");
        spec.type = e->value;
    }
    if (const RawEntry* e = raw.find(section + ".mu")) spec.mu = parse_double(section + ".mu", *e);
    if (const RawEntry* e = raw.find(section + ".probs"))
        spec.probs = parse_grid(section + ".probs", *e);
    if (const RawEntry* e = raw.find(section + ".tail_tolerance"))
        spec.tail_tolerance = parse_double(section + ".tail_tolerance", *e);
    if (spec.type == "custom" && spec.probs.empty())
        throw ConfigError("config: [" + section + "] type=custom requires probs");
    if (spec.type != "custom" && !spec.probs.empty())
        throw ConfigError("config: [" + section + "] probs is only valid with type=custom");
}

std::array<double, 3> parse_probs3(const std::string& key, const RawEntry& e) {
    const std::vector<double> v = parse_grid(key, e);
    if (v.size() != 3) bad_value(key, e, "three comma-separated probabilities (o,x,y)");
    return {v[0], v[1], v[2]};
}

std::string grid_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_g17(v[i]);
    }
    return out;
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
    RawConfig raw = tokenize(text);
    RunConfig cfg;

    parse_source_section(raw, "alice.x", cfg.alice_x);
    parse_source_section(raw, "alice.y", cfg.alice_y);
    // Bob mirrors Alice unless configured explicitly.
    cfg.bob_x = cfg.alice_x;
    cfg.bob_y = cfg.alice_y;
    if (raw.has_section("bob.x")) {
        cfg.bob_x = SourceSpec{};
        parse_source_section(raw, "bob.x", cfg.bob_x);
    }
    if (raw.has_section("bob.y")) {
        cfg.bob_y = SourceSpec{};
        parse_source_section(raw, "bob.y", cfg.bob_y);
    }

    if (const RawEntry* e = raw.find("channel.eta_a")) cfg.eta_a = parse_double("channel.eta_a", *e);
    if (const RawEntry* e = raw.find("channel.eta_b")) cfg.eta_b = parse_double("channel.eta_b", *e);
    if (const RawEntry* e = raw.find("channel.dark")) cfg.dark = parse_double("channel.dark", *e);
    if (const RawEntry* e = raw.find("channel.misalign"))
        cfg.misalign = parse_double("channel.misalign", *e);
    if (const RawEntry* e = raw.find("channel.k_max"))
        cfg.k_max = static_cast<int>(parse_u64("channel.k_max", *e));
    if (const RawEntry* e = raw.find("channel.table_csv")) cfg.table_csv = e->value;

    if (const RawEntry* e = raw.find("coding.theta_az"))
        cfg.coding.theta_az = parse_double("coding.theta_az", *e);
    if (const RawEntry* e = raw.find("coding.theta_ax"))
        cfg.coding.theta_ax = parse_double("coding.theta_ax", *e);
    if (const RawEntry* e = raw.find("coding.theta_bz"))
        cfg.coding.theta_bz = parse_double("coding.theta_bz", *e);
    if (const RawEntry* e = raw.find("coding.theta_bx"))
        cfg.coding.theta_bx = parse_double("coding.theta_bx", *e);
    if (const RawEntry* e = raw.find("coding.g_z")) cfg.coding.g_z = parse_double("coding.g_z", *e);
    if (const RawEntry* e = raw.find("coding.g_x")) cfg.coding.g_x = parse_double("coding.g_x", *e);
    if (const RawEntry* e = raw.find("coding.delta_x_max"))
        cfg.coding.delta_x_max = parse_double("coding.delta_x_max", *e);
    if (const RawEntry* e = raw.find("coding.flip_p_z"))
        cfg.coding.flip_p_z = parse_double("coding.flip_p_z", *e);
    if (const RawEntry* e = raw.find("coding.flip_p_x"))
        cfg.coding.flip_p_x = parse_double("coding.flip_p_x", *e);

    if (raw.has_section("fluctuation")) {
        cfg.has_fluctuation = true;
        bool any = false;
        if (const RawEntry* e = raw.find("fluctuation.rel")) {
            cfg.fluct_cells.fill(parse_double("fluctuation.rel", *e));
            any = true;
        }
        if (const RawEntry* e = raw.find("fluctuation.rel_cells")) {
            const std::vector<double> v = parse_grid("fluctuation.rel_cells", *e);
            if (v.size() != 9)
                bad_value("fluctuation.rel_cells", *e,
                          "nine values (oo,ox,oy,xo,xx,xy,yo,yx,yy)");
            for (int i = 0; i < 9; ++i) cfg.fluct_cells[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
            any = true;
        }
        if (const RawEntry* e = raw.find("fluctuation.from_counts")) {
            cfg.fluct_from_counts = parse_bool("fluctuation.from_counts", *e);
            any = any || cfg.fluct_from_counts;
        }
        if (const RawEntry* e = raw.find("fluctuation.n_std"))
            cfg.fluct_n_std = parse_double("fluctuation.n_std", *e);
        if (!any)
            throw ConfigError("config: [fluctuation] needs rel, rel_cells or from_counts=true");
    }

    if (const RawEntry* e = raw.find("run.f_ec")) cfg.f_ec = parse_double("run.f_ec", *e);
    if (const RawEntry* e = raw.find("run.mode")) {
        if (e->value != "asymptotic" && e->value != "montecarlo")
            bad_value("run.mode", *e, "asymptotic or montecarlo");
        cfg.mode = e->value;
    }
    if (const RawEntry* e = raw.find("run.single_basis_decoy"))
        cfg.single_basis_decoy = parse_bool("run.single_basis_decoy", *e);
    if (const RawEntry* e = raw.find("run.phase_randomized"))
        cfg.phase_randomized = parse_bool("run.phase_randomized", *e);
    if (const RawEntry* e = raw.find("run.single_basis_plain_delta2"))
        cfg.single_basis_plain_delta2 = parse_bool("run.single_basis_plain_delta2", *e);
    if (const RawEntry* e = raw.find("run.seed")) cfg.seed = parse_u64("run.seed", *e);
    if (const RawEntry* e = raw.find("run.n_pairs")) cfg.n_pairs = parse_u64("run.n_pairs", *e);
    if (const RawEntry* e = raw.find("run.p_alice")) cfg.p_alice = parse_probs3("run.p_alice", *e);
    if (const RawEntry* e = raw.find("run.p_bob")) cfg.p_bob = parse_probs3("run.p_bob", *e);
    if (const RawEntry* e = raw.find("run.p_basis_z"))
        cfg.p_basis_z = parse_double("run.p_basis_z", *e);

    if (const RawEntry* e = raw.find("scan.distance_km"))
        cfg.scan_distance_km = parse_grid("scan.distance_km", *e);
    if (const RawEntry* e = raw.find("scan.eta")) cfg.scan_eta = parse_grid("scan.eta", *e);
    if (const RawEntry* e = raw.find("scan.db_per_km"))
        cfg.db_per_km = parse_double("scan.db_per_km", *e);

    if (const RawEntry* e = raw.find("optimize.mu_x")) cfg.opt_mu_x = parse_grid("optimize.mu_x", *e);
    if (const RawEntry* e = raw.find("optimize.mu_y")) cfg.opt_mu_y = parse_grid("optimize.mu_y", *e);

    for (const auto& [key, entry] : raw.entries) {
        if (!entry.consumed)
            throw ConfigError("config line " + std::to_string(entry.line) + ": unknown key '" +
                              key + "'");
    }

    // Cross-field validation; build everything once so bad values surface now.
    if (!cfg.scan_distance_km.empty() && !cfg.scan_eta.empty())
        throw ConfigError("config: [scan] accepts distance_km or eta, not both");
    try {
        cfg.coding.validate();
        cfg.alice_sources();
        cfg.bob_sources();
        if (cfg.table_csv.empty()) {
            build_channel(cfg.eta_a, cfg.eta_b, cfg.dark, cfg.misalign, cfg.k_max);
        } else {
            cfg.channel();
        }
        if (cfg.has_fluctuation && !cfg.fluct_from_counts)
            FluctuationSpec{cfg.fluct_cells}.validate();
        cfg.sim_config();
        if (!(cfg.f_ec >= 1.0 && cfg.f_ec <= 2.0)) throw ConfigError("config: run.f_ec outside [1,2]");
    } catch (const ConfigError&) {
        throw;
    } catch (const DecoyConditionViolation&) {
        throw;  // distinct exit code at the CLI
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

namespace {

void echo_source(std::ostream& os, const char* section, const SourceSpec& s) {
    os << "[" << section << "]\n";
    os << "type = " << s.type << "\n";
    if (s.type == "custom")
        os << "probs = " << grid_text(s.probs) << "\n";
    else
        os << "mu = " << format_g17(s.mu) << "\n";
    os << "tail_tolerance = " << format_g17(s.tail_tolerance) << "\n";
}

}  // namespace

std::string RunConfig::effective_text() const {
    std::ostringstream os;
    echo_source(os, "alice.x", alice_x);
    echo_source(os, "alice.y", alice_y);
    echo_source(os, "bob.x", bob_x);
    echo_source(os, "bob.y", bob_y);
    os << "[channel]\n";
    os << "eta_a = " << format_g17(eta_a) << "\n";
    os << "eta_b = " << format_g17(eta_b) << "\n";
    os << "dark = " << format_g17(dark) << "\n";
    os << "misalign = " << format_g17(misalign) << "\n";
    os << "k_max = " << k_max << "\n";
    if (!table_csv.empty()) os << "table_csv = " << table_csv << "\n";
    os << "[coding]\n";
    os << "theta_az = " << format_g17(coding.theta_az) << "\n";
    os << "theta_ax = " << format_g17(coding.theta_ax) << "\n";
    os << "theta_bz = " << format_g17(coding.theta_bz) << "\n";
    os << "theta_bx = " << format_g17(coding.theta_bx) << "\n";
    os << "g_z = " << format_g17(coding.g_z) << "\n";
    os << "g_x = " << format_g17(coding.g_x) << "\n";
    os << "delta_x_max = " << format_g17(coding.delta_x_max) << "\n";
    if (coding.flip_p_z) os << "flip_p_z = " << format_g17(*coding.flip_p_z) << "\n";
    if (coding.flip_p_x) os << "flip_p_x = " << format_g17(*coding.flip_p_x) << "\n";
    if (has_fluctuation) {
        os << "[fluctuation]\n";
        if (fluct_from_counts) {
            os << "from_counts = true\n";
            os << "n_std = " << format_g17(fluct_n_std) << "\n";
        } else {
            os << "rel_cells = " << grid_text({fluct_cells.begin(), fluct_cells.end()}) << "\n";
        }
    }
    os << "[run]\n";
    os << "f_ec = " << format_g17(f_ec) << "\n";
    os << "mode = " << mode << "\n";
    os << "single_basis_decoy = " << (single_basis_decoy ? "true" : "false") << "\n";
    os << "phase_randomized = " << (phase_randomized ? "true" : "false") << "\n";
    os << "single_basis_plain_delta2 = " << (single_basis_plain_delta2 ? "true" : "false") << "\n";
    os << "seed = " << seed << "\n";
    os << "n_pairs = " << n_pairs << "\n";
    os << "p_alice = " << grid_text({p_alice.begin(), p_alice.end()}) << "\n";
    os << "p_bob = " << grid_text({p_bob.begin(), p_bob.end()}) << "\n";
    os << "p_basis_z = " << format_g17(p_basis_z) << "\n";
    if (!scan_distance_km.empty() || !scan_eta.empty()) {
        os << "[scan]\n";
        if (!scan_distance_km.empty()) os << "distance_km = " << grid_text(scan_distance_km) << "\n";
        if (!scan_eta.empty()) os << "eta = " << grid_text(scan_eta) << "\n";
        os << "db_per_km = " << format_g17(db_per_km) << "\n";
    }
    if (!opt_mu_x.empty() || !opt_mu_y.empty()) {
        os << "[optimize]\n";
        if (!opt_mu_x.empty()) os << "mu_x = " << grid_text(opt_mu_x) << "\n";
        if (!opt_mu_y.empty()) os << "mu_y = " << grid_text(opt_mu_y) << "\n";
    }
    return os.str();
}

namespace {

PhotonNumberSource build_one(const SourceSpec& s, const std::string& label, int k_max) {
    if (s.type == "coherent") return coherent_source(s.mu, k_max, s.tail_tolerance);
    if (s.type == "thermal") return heralded_pdc_source(s.mu, k_max, s.tail_tolerance);
    std::vector<double> probs = s.probs;
    probs.resize(static_cast<std::size_t>(k_max) + 1, 0.0);
    if (static_cast<int>(s.probs.size()) - 1 > k_max)
        throw ConfigError("config: [" + label + "] custom probs longer than channel k_max+1");
    return custom_source(label, std::move(probs), s.tail_tolerance);
}

}  // namespace

SourceTriple RunConfig::alice_sources() const {
    return make_source_triple(build_one(alice_x, "alice.x", k_max),
                              build_one(alice_y, "alice.y", k_max));
}

SourceTriple RunConfig::bob_sources() const {
    return make_source_triple(build_one(bob_x, "bob.x", k_max), build_one(bob_y, "bob.y", k_max));
}

GroundTruthChannel RunConfig::channel() const {
    GroundTruthChannel ch = build_channel(eta_a, eta_b, dark, misalign, k_max);
    if (!table_csv.empty()) {
        std::ifstream in(table_csv);
        if (!in) throw ConfigError("config: channel.table_csv: cannot open '" + table_csv + "'");
        apply_table_overrides_csv(ch, in);
    }
    return ch;
}

SimRunConfig RunConfig::sim_config() const {
    SimRunConfig sim;
    sim.n_pairs = n_pairs;
    sim.probs_alpha = p_alice;
    sim.probs_beta = p_bob;
    sim.basis_probs = {p_basis_z, 1.0 - p_basis_z};
    sim.seed = seed;
    sim.validate();
    return sim;
}

FluctuationSpec RunConfig::fluctuation_for(const TwoPulseObservables& obs) const {
    if (!has_fluctuation) return FluctuationSpec{};
    if (fluct_from_counts) return FluctuationSpec::from_counts(obs, fluct_n_std);
    FluctuationSpec f{fluct_cells};
    f.validate();
    return f;
}

}  // namespace mdiqkd
