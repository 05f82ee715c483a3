#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mdiqkd {

enum class Basis { Z = 0, X = 1 };

char basis_letter(Basis b);
Basis basis_from_letter(char c);

/// Source identities per side: o (vacuum), x (decoy), y (signal).
enum class SourceId { o = 0, x = 1, y = 2 };

inline constexpr std::array<SourceId, 3> kSourceIds{SourceId::o, SourceId::x, SourceId::y};

char source_letter(SourceId id);
SourceId source_from_letter(char c);

/// Per-basis 3x3 tables of observed yields and error rates, with optional
/// pair counts for fluctuation analysis. Rows index Alice's source, columns
/// Bob's.
struct TwoPulseObservables {
    Basis basis = Basis::Z;
    std::array<double, 9> S{};  // yields
    std::array<double, 9> E{};  // error rates
    std::optional<std::array<double, 9>> N;  // pair counts

    static int idx(SourceId a, SourceId b) {
        return 3 * static_cast<int>(a) + static_cast<int>(b);
    }

    double yield(SourceId a, SourceId b) const { return S[static_cast<std::size_t>(idx(a, b))]; }
    double error(SourceId a, SourceId b) const { return E[static_cast<std::size_t>(idx(a, b))]; }
    double count(SourceId a, SourceId b) const {
        return N ? (*N)[static_cast<std::size_t>(idx(a, b))] : 0.0;
    }
    void set(SourceId a, SourceId b, double s, double e) {
        S[static_cast<std::size_t>(idx(a, b))] = s;
        E[static_cast<std::size_t>(idx(a, b))] = e;
    }

    /// All S and E entries in [0,1]; counts, when present, nonnegative.
    void validate() const;
};

/// Stable float formatting with 17 significant digits, shared by every CSV
/// writer so outputs are byte-reproducible.
std::string format_g17(double v);

/// CSV schema: optional '#' comment lines, a "basis,alpha,beta,S,E,N" header,
/// then one row per (basis, alpha, beta). The N field is left empty for
/// asymptotic data. Rows are emitted in fixed order: basis Z then X, sources
/// o,x,y nested row-major.
void write_observables_csv(std::ostream& os, const std::vector<TwoPulseObservables>& tables,
                           const std::string& header_comment = "");

/// Parses the schema above. Each basis that appears must be complete (all
/// nine source pairs exactly once); N must be present for all rows of a basis
/// or none of them. Throws std::invalid_argument with a line diagnostic.
std::vector<TwoPulseObservables> read_observables_csv(std::istream& is);

/// Returns the leading '#' comment block of a CSV stream with the comment
/// markers stripped (used to re-ingest echoed parameters).
std::string read_csv_comment_block(std::istream& is);

const TwoPulseObservables* find_basis(const std::vector<TwoPulseObservables>& tables, Basis b);

}  // namespace mdiqkd
