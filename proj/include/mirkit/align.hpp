#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mirkit/errors.hpp"

namespace mirkit {

/// Match/mismatch plus affine gap costs; a gap of length L costs
/// gap_open + L * gap_extend. 'N' scores as a mismatch against everything,
/// including 'N'.
struct ScoringScheme {
    int match = 5;
    int mismatch = -4;
    int gap_open = 10;    // penalty, charged once per gap run
    int gap_extend = 1;   // penalty per gap column

    int score(char a, char b) const {
        if (a == 'N' || b == 'N') return mismatch;
        return a == b ? match : mismatch;
    }

    /// Expected column score under a uniform background; must be negative for
    /// local-alignment statistics to exist.
    double expected_score() const { return 0.25 * match + 0.75 * mismatch; }

    void validate() const;
};

struct PairwiseAlignment {
    std::string aligned_a;  // over {A,C,G,U,N,-}
    std::string aligned_b;  // same length, never gap-vs-gap
    // 1-based inclusive spans in the originals; all zero for an empty alignment.
    std::size_t a_start = 0, a_end = 0;
    std::size_t b_start = 0, b_end = 0;
    int score = 0;
    std::size_t identities = 0;
    std::size_t mismatches = 0;
    std::size_t gap_columns = 0;

    std::size_t length() const noexcept { return aligned_a.size(); }
    bool empty() const noexcept { return aligned_a.empty(); }
};

/// Optimal global alignment (Gotoh three-state affine recurrence). Traceback
/// ties prefer diagonal over gap-in-a over gap-in-b, and gap extension over a
/// new gap open, making the result deterministic.
PairwiseAlignment global_align(std::string_view a, std::string_view b, const ScoringScheme& scheme);

/// Optimal local alignment (Smith-Waterman with affine gaps); score >= 0. An
/// empty alignment (score 0) is returned when no cell scores positive.
PairwiseAlignment local_align(std::string_view a, std::string_view b, const ScoringScheme& scheme);

/// identities / alignment length. Throws Errc::empty_alignment on length 0.
double fractional_identity(const PairwiseAlignment& al);

/// Column-by-column rescoring of the aligned strings (gap runs charged
/// gap_open once plus gap_extend per column). Used to assert the score
/// invariant independently of the DP.
int recompute_score(const PairwiseAlignment& al, const ScoringScheme& scheme);

/// Alignment profile: the gapped rows of its member sequences plus derived
/// per-column residue frequencies over {A,C,G,U,N,-}.
class Profile {
public:
    Profile() = default;
    Profile(std::string id, std::string_view sequence);  // single-member profile
    Profile(std::vector<std::string> ids, std::vector<std::string> rows);

    std::size_t columns() const noexcept { return rows_.empty() ? 0 : rows_[0].size(); }
    std::size_t depth() const noexcept { return rows_.size(); }
    const std::vector<std::string>& member_ids() const noexcept { return ids_; }
    const std::vector<std::string>& rows() const noexcept { return rows_; }

    /// Frequencies for one column, indexed A,C,G,U,N,'-'; sums to 1.
    std::array<double, 6> frequencies(std::size_t col) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::string> rows_;
};

struct ProfileAlignResult {
    Profile merged;
    double score = 0.0;
    /// merged column -> (p column, q column), 1-based, 0 where a new gap was
    /// inserted on that side.
    std::vector<std::pair<std::size_t, std::size_t>> column_map;
};

/// Global profile-profile alignment. Column-vs-column substitution score is
/// the frequency-weighted average pairwise residue score; existing gaps score
/// -gap_extend against residues and 0 against gaps. New gap columns are
/// charged through the affine machinery.
ProfileAlignResult profile_align(const Profile& p, const Profile& q, const ScoringScheme& scheme);

inline int residue_index(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'U': return 3;
        case 'N': return 4;
        default: return 5;  // '-'
    }
}

}  // namespace mirkit
