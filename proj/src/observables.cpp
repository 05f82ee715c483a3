#include "mdiqkd/observables.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mdiqkd {

char basis_letter(Basis b) { return b == Basis::Z ? 'Z' : 'X'; }

Basis basis_from_letter(char c) {
    if (c == 'Z' || c == 'z') return Basis::Z;
    if (c == 'X' || c == 'x') return Basis::X;
    throw std::invalid_argument(std::string("unknown basis letter '") + c + "'");
}

char source_letter(SourceId id) {
    switch (id) {
        case SourceId::o: return 'o';
        case SourceId::x: return 'x';
        case SourceId::y: return 'y';
    }
    return '?';
}

SourceId source_from_letter(char c) {
    if (c == 'o' || c == 'O') return SourceId::o;
    if (c == 'x' || c == 'X') return SourceId::x;
    if (c == 'y' || c == 'Y') return SourceId::y;
    throw std::invalid_argument(std::string("unknown source letter '") + c + "'");
}

void TwoPulseObservables::validate() const {
    for (int i = 0; i < 9; ++i) {
        if (!(S[static_cast<std::size_t>(i)] >= 0.0 && S[static_cast<std::size_t>(i)] <= 1.0))
            throw std::invalid_argument("TwoPulseObservables: yield outside [0,1]");
        if (!(E[static_cast<std::size_t>(i)] >= 0.0 && E[static_cast<std::size_t>(i)] <= 1.0))
            throw std::invalid_argument("TwoPulseObservables: error rate outside [0,1]");
        if (N && !((*N)[static_cast<std::size_t>(i)] >= 0.0))
            throw std::invalid_argument("TwoPulseObservables: negative pair count");
    }
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_observables_csv(std::ostream& os, const std::vector<TwoPulseObservables>& tables,
                           const std::string& header_comment) {
    if (!header_comment.empty()) {
        std::istringstream lines(header_comment);
        std::string line;
        while (std::getline(lines, line)) os << "# " << line << "\n";
    }
    os << "basis,alpha,beta,S,E,N\n";
    for (const TwoPulseObservables& t : tables) {
        for (SourceId a : kSourceIds) {
            for (SourceId b : kSourceIds) {
                os << basis_letter(t.basis) << ',' << source_letter(a) << ',' << source_letter(b)
                   << ',' << format_g17(t.yield(a, b)) << ',' << format_g17(t.error(a, b)) << ',';
                if (t.N) os << format_g17(t.count(a, b));
                os << "\n";
            }
        }
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

double parse_double(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("observables CSV line " + std::to_string(line_no) +
                                    ": bad " + what + " value '" + s + "'");
    }
}

}  // namespace

std::vector<TwoPulseObservables> read_observables_csv(std::istream& is) {
    std::vector<TwoPulseObservables> tables;
    // -1: unseen, otherwise index into tables
    std::array<int, 2> table_of_basis{-1, -1};
    std::array<std::array<int, 9>, 2> seen{};  // row multiplicity per basis
    std::array<int, 2> n_fields_seen{};        // rows with a nonempty N field

    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // fixed header row
            if (line.rfind("basis,", 0) != 0)
                throw std::invalid_argument("observables CSV line " + std::to_string(line_no) +
                                            ": expected header 'basis,alpha,beta,S,E,N'");
            continue;
        }
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 6)
            throw std::invalid_argument("observables CSV line " + std::to_string(line_no) +
                                        ": expected 6 fields, got " + std::to_string(f.size()));
        if (f[0].size() != 1 || f[1].size() != 1 || f[2].size() != 1)
            throw std::invalid_argument("observables CSV line " + std::to_string(line_no) +
                                        ": basis/alpha/beta must be single letters");
        const Basis basis = basis_from_letter(f[0][0]);
        const SourceId a = source_from_letter(f[1][0]);
        const SourceId b = source_from_letter(f[2][0]);
        const double S = parse_double(f[3], line_no, "S");
        const double E = parse_double(f[4], line_no, "E");

        const int bi = static_cast<int>(basis);
        if (table_of_basis[static_cast<std::size_t>(bi)] < 0) {
            table_of_basis[static_cast<std::size_t>(bi)] = static_cast<int>(tables.size());
            TwoPulseObservables t;
            t.basis = basis;
            tables.push_back(t);
        }
        TwoPulseObservables& t =
            tables[static_cast<std::size_t>(table_of_basis[static_cast<std::size_t>(bi)])];
        const int cell = TwoPulseObservables::idx(a, b);
        if (++seen[static_cast<std::size_t>(bi)][static_cast<std::size_t>(cell)] > 1)
            throw std::invalid_argument("observables CSV line " + std::to_string(line_no) +
                                        ": duplicate row for this basis/source pair");
        t.set(a, b, S, E);
        if (!f[5].empty()) {
            if (!t.N) t.N = std::array<double, 9>{};
            (*t.N)[static_cast<std::size_t>(cell)] = parse_double(f[5], line_no, "N");
            ++n_fields_seen[static_cast<std::size_t>(bi)];
        }
    }

    for (int bi = 0; bi < 2; ++bi) {
        if (table_of_basis[static_cast<std::size_t>(bi)] < 0) continue;
        int rows = 0;
        for (int c = 0; c < 9; ++c) rows += seen[static_cast<std::size_t>(bi)][static_cast<std::size_t>(c)];
        if (rows != 9)
            throw std::invalid_argument(std::string("observables CSV: basis ") +
                                        basis_letter(static_cast<Basis>(bi)) +
                                        " is incomplete (needs all 9 source pairs)");
        const int nf = n_fields_seen[static_cast<std::size_t>(bi)];
        if (nf != 0 && nf != 9)
            throw std::invalid_argument(std::string("observables CSV: basis ") +
                                        basis_letter(static_cast<Basis>(bi)) +
                                        " mixes rows with and without counts");
    }
    if (tables.empty()) throw std::invalid_argument("observables CSV: no data rows");
    for (const TwoPulseObservables& t : tables) t.validate();
    return tables;
}

std::string read_csv_comment_block(std::istream& is) {
    std::string out;
    std::string line;
    while (is.peek() == '#' && std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = 1;
        if (start < line.size() && line[start] == ' ') ++start;
        out.append(line, start, std::string::npos);
        out += '\n';
    }
    return out;
}

const TwoPulseObservables* find_basis(const std::vector<TwoPulseObservables>& tables, Basis b) {
    for (const TwoPulseObservables& t : tables)
        if (t.basis == b) return &t;
    return nullptr;
}

}  // namespace mdiqkd
