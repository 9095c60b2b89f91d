#include "mirkit/setops.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <set>

namespace mirkit {

bool keys_match(const MatureKey& a, const MatureKey& b, std::size_t tolerance) {
    if (a.canonical.size() != b.canonical.size()) return false;
    if (tolerance == 0) return a.canonical == b.canonical;
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < a.canonical.size(); ++i)
        if (a.canonical[i] != b.canonical[i] && ++mismatches > tolerance) return false;
    return true;
}

std::vector<MatureKey> mature_keys(const Corpus& corpus, std::string_view species) {
    if (!corpus.has_species(species))
        throw make_error(Errc::unknown_species, "unknown species '" + std::string(species) + "'");

    std::set<std::string> seqs;
    for (const auto* rec : corpus.records_of(species))
        if (rec->kind == SeqKind::Mature) seqs.insert(rec->residues.str());
    for (const auto& ann : corpus.annotations()) {
        const SeqRecord* prec = corpus.find(ann.precursor_id);
        if (prec && prec->species == species)
            seqs.insert(corpus.mature_sequence(ann).str());
    }

    std::vector<MatureKey> keys;
    keys.reserve(seqs.size());
    for (auto& s : seqs) keys.push_back(MatureKey{s});
    return keys;  // std::set iteration is already sorted
}

namespace {

/// Kuhn's augmenting-path maximum bipartite matching; sizes here are tiny.
class BipartiteMatcher {
public:
    BipartiteMatcher(std::size_t left, std::size_t right)
        : adjacency_(left), match_right_(right, -1) {}

    void add_edge(std::size_t l, std::size_t r) { adjacency_[l].push_back(r); }

    std::size_t solve() {
        std::size_t matched = 0;
        for (std::size_t l = 0; l < adjacency_.size(); ++l) {
            visited_.assign(match_right_.size(), false);
            if (augment(l)) ++matched;
        }
        return matched;
    }

private:
    bool augment(std::size_t l) {
        for (std::size_t r : adjacency_[l]) {
            if (visited_[r]) continue;
            visited_[r] = true;
            if (match_right_[r] < 0 || augment(static_cast<std::size_t>(match_right_[r]))) {
                match_right_[r] = static_cast<int>(l);
                return true;
            }
        }
        return false;
    }

    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<int> match_right_;
    std::vector<bool> visited_;
};

}  // namespace

std::size_t pairwise_shared(const std::vector<MatureKey>& a, const std::vector<MatureKey>& b,
                            std::size_t tolerance) {
    if (tolerance == 0) {
        std::set<std::string> bs;
        for (const auto& k : b) bs.insert(k.canonical);
        std::set<std::string> shared;
        for (const auto& k : a)
            if (bs.count(k.canonical)) shared.insert(k.canonical);
        return shared.size();
    }
    BipartiteMatcher matcher(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (keys_match(a[i], b[j], tolerance)) matcher.add_edge(i, j);
    return matcher.solve();
}

IntersectionReport venn(const Corpus& corpus, const std::vector<std::string>& species,
                        std::size_t tolerance) {
    if (species.size() < 2 || species.size() > 4)
        throw make_error(Errc::invalid_argument, "venn analysis covers 2 to 4 species");

    IntersectionReport report;
    report.species = species;
    report.tolerance = tolerance;

    std::vector<std::vector<MatureKey>> keysets;
    keysets.reserve(species.size());
    for (const auto& code : species) keysets.push_back(mature_keys(corpus, code));

    std::set<MatureKey> union_keys;
    for (const auto& ks : keysets) union_keys.insert(ks.begin(), ks.end());
    report.union_size = union_keys.size();

    const unsigned full = (1u << species.size()) - 1u;
    for (unsigned mask = 1; mask <= full; ++mask) report.region_counts[mask] = 0;

    auto present_in = [&](const MatureKey& key, std::size_t s) {
        const auto& ks = keysets[s];
        if (tolerance == 0)
            return std::binary_search(ks.begin(), ks.end(), key);
        return std::any_of(ks.begin(), ks.end(),
                           [&](const MatureKey& other) { return keys_match(key, other, tolerance); });
    };

    for (const auto& key : union_keys) {
        unsigned mask = 0;
        for (std::size_t s = 0; s < species.size(); ++s)
            if (present_in(key, s)) mask |= 1u << s;
        ++report.region_counts[mask];
    }

    report.pairwise.assign(species.size(), std::vector<std::size_t>(species.size(), 0));
    for (const auto& [mask, count] : report.region_counts)
        for (std::size_t i = 0; i < species.size(); ++i)
            for (std::size_t j = i + 1; j < species.size(); ++j)
                if ((mask & (1u << i)) && (mask & (1u << j))) {
                    report.pairwise[i][j] += count;
                    report.pairwise[j][i] += count;
                }
    return report;
}

void write_matrix(const IntersectionReport& report, std::ostream& out) {
    out << "# mirkit intersection matrix (tolerance=" << report.tolerance << ")\n";
    out << "species";
    for (const auto& code : report.species) out << '\t' << code;
    out << '\n';
    for (std::size_t i = 0; i < report.species.size(); ++i) {
        out << report.species[i];
        for (std::size_t j = 0; j < report.species.size(); ++j) {
            out << '\t';
            if (i == j)
                out << 'X';
            else
                out << report.pairwise[i][j];
        }
        out << '\n';
    }
}

void write_venn(const IntersectionReport& report, std::ostream& out) {
    out << "# mirkit venn regions (tolerance=" << report.tolerance << ")\n";
    out << "# subset\tcount\n";
    const unsigned full = (1u << report.species.size()) - 1u;
    // Canonical order: by subset size, then by species indices.
    std::vector<unsigned> masks;
    for (unsigned mask = 1; mask <= full; ++mask) masks.push_back(mask);
    std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
        return std::popcount(a) != std::popcount(b) ? std::popcount(a) < std::popcount(b) : a < b;
    });
    for (unsigned mask : masks) {
        bool first = true;
        for (std::size_t s = 0; s < report.species.size(); ++s) {
            if (mask & (1u << s)) {
                if (!first) out << '+';
                out << report.species[s];
                first = false;
            }
        }
        out << '\t' << report.region_counts.at(mask) << '\n';
    }
}

}  // namespace mirkit
