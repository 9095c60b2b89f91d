#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mirkit/seq.hpp"

namespace mirkit {

/// Canonical (normalized, U-alphabet) mature sequence used for cross-species
/// comparison.
struct MatureKey {
    std::string canonical;

    bool operator==(const MatureKey&) const = default;
    auto operator<=>(const MatureKey&) const = default;
};

/// Equal at tolerance 0 iff identical; at tolerance k iff equal length and
/// Hamming distance <= k.
bool keys_match(const MatureKey& a, const MatureKey& b, std::size_t tolerance);

/// Distinct mature sequences of one species, sorted. Sources are records of
/// kind Mature plus mature subsequences extracted from annotated precursors;
/// duplicates (by sequence) collapse. Throws Errc::unknown_species.
std::vector<MatureKey> mature_keys(const Corpus& corpus, std::string_view species);

/// Shared count between two key sets: exact intersection size at tolerance 0,
/// otherwise the maximum bipartite matching size under keys_match.
std::size_t pairwise_shared(const std::vector<MatureKey>& a, const std::vector<MatureKey>& b,
                            std::size_t tolerance = 0);

/// Venn region counts plus the derived pairwise matrix over 2..4 species.
struct IntersectionReport {
    std::vector<std::string> species;  // command-line order
    /// Bitmask over species indices -> count of union keys present in exactly
    /// that subset; every non-empty subset is present (possibly 0).
    std::map<unsigned, std::size_t> region_counts;
    std::vector<std::vector<std::size_t>> pairwise;  // symmetric, diagonal unused
    std::size_t union_size = 0;
    std::size_t tolerance = 0;
};

/// Classifies every distinct mature key of the union by the subset of species
/// it occurs in (tolerance k: within-k match against any key of the species).
IntersectionReport venn(const Corpus& corpus, const std::vector<std::string>& species,
                        std::size_t tolerance = 0);

/// Matrix TSV mirroring the species-vs-species table: header row of codes,
/// "X" on the diagonal.
void write_matrix(const IntersectionReport& report, std::ostream& out);

/// Venn TSV: `subset<TAB>count`, subsets plus-joined in canonical order
/// (singletons, then pairs, triples, quad).
void write_venn(const IntersectionReport& report, std::ostream& out);

}  // namespace mirkit
