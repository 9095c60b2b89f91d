#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mirkit/align.hpp"
#include "mirkit/seq.hpp"

namespace mirkit {

enum class Strand { Forward, ReverseComplement };

std::string_view to_string(Strand strand);

/// Exact-match w-mer index over a subject sequence. w-mers containing 'N' are
/// never indexed; positions are 1-based starts, stored sorted.
class KmerIndex {
public:
    KmerIndex(std::string_view subject, std::size_t word_size = 7);

    std::size_t word_size() const noexcept { return word_; }
    std::size_t subject_length() const noexcept { return length_; }
    std::size_t distinct_words() const noexcept { return table_.size(); }

    /// Positions of one w-mer; nullptr when absent (or the word contains 'N').
    const std::vector<std::uint32_t>* positions(std::string_view word) const;

private:
    std::size_t word_ = 0;
    std::size_t length_ = 0;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> table_;
};

/// One exact w-mer seed. For ReverseComplement, query_pos indexes the
/// reverse-complemented query; subject coordinates are always forward-strand.
struct SeedMatch {
    std::size_t query_pos = 0;
    std::size_t subject_pos = 0;
    Strand strand = Strand::Forward;
};

/// All seeds of the query (as-is for Forward, reverse-complemented for
/// ReverseComplement) against the index, sorted by (subject_pos, query_pos).
std::vector<SeedMatch> seed_hits(std::string_view query, const KmerIndex& index, Strand strand);

struct KarlinAltschulParams {
    double lambda = 0.0;
    double k = 0.1;
    std::array<double, 4> background{0.25, 0.25, 0.25, 0.25};
};

/// Solves sum_ij p_i p_j exp(lambda*s(i,j)) = 1 for lambda by bisection on
/// (0, 10]; requires a negative expected score.
KarlinAltschulParams calibrate(const ScoringScheme& scheme,
                               const std::array<double, 4>& background = {0.25, 0.25, 0.25, 0.25},
                               double k = 0.1);

/// E = k * m * n * exp(-lambda * score).
double e_value(int score, std::size_t query_len, std::size_t subject_len,
               const KarlinAltschulParams& params);

/// Ungapped two-sided X-drop extension of a seed; returns the best-scoring
/// extent (which always contains the seed columns).
PairwiseAlignment extend_hit(const SeedMatch& seed, std::string_view query,
                             std::string_view subject, const ScoringScheme& scheme, int x_drop);

enum class MatchClass { Exact, OneMismatch, TwoMismatch, NotSignificant };

std::string_view to_string(MatchClass mc);

struct SearchHit {
    std::string query_id;
    std::string subject_id;
    Strand strand = Strand::Forward;
    PairwiseAlignment alignment;  // a side = query on the hit strand
    std::size_t q_start = 0, q_end = 0;  // original (forward) query coordinates
    double evalue = 0.0;
    std::size_t mature_overlap = 0;
    MatchClass match_class = MatchClass::NotSignificant;
};

/// Keep iff the query-side span overlaps [ann.start, ann.end] by >= 1
/// position; the overlap column count is returned alongside.
struct OverlapOutcome {
    bool keep = false;
    std::size_t overlap = 0;
};
OverlapOutcome mature_overlap_filter(const SearchHit& hit, const MatureAnnotation& ann);

/// Keep iff the mature-length difference is at most 2nt.
bool length_diff_filter(std::size_t hit_mature_len, std::size_t query_mature_len);

/// Table-style classification of the best surviving hit (nullptr = none):
/// Exact / OneMismatch / TwoMismatch require full mature-span coverage with
/// 0/1/2 combined mismatch+gap columns; everything else is NotSignificant.
MatchClass classify_match(const SearchHit* best, const MatureAnnotation& ann);

struct SearchParams {
    std::size_t word_size = 7;
    double e_cutoff = 10.0;
    ScoringScheme scheme{};
    int x_drop = 20;
    bool forward = true;
    bool reverse = true;
    bool gapped_rescore = false;  // re-align survivors with local_align
    double k = 0.1;
    unsigned threads = 1;
};

struct ClassTally {
    std::size_t exact = 0;
    std::size_t one_mismatch = 0;
    std::size_t two_mismatch = 0;
    std::size_t not_significant = 0;

    std::size_t total() const { return exact + one_mismatch + two_mismatch + not_significant; }
    void add(MatchClass mc);
};

struct QueryResult {
    std::string query_id;
    std::optional<SearchHit> best;  // best surviving hit, if any
    MatchClass match_class = MatchClass::NotSignificant;
};

struct SearchResult {
    std::string subject_id;
    std::vector<QueryResult> queries;  // corpus order
    ClassTally tally;
};

/// Seed-and-extend search of every annotated precursor in `queries` against
/// `subject`: seeds -> ungapped X-drop extensions -> E-value cutoff ->
/// mature-overlap filter -> length-difference filter -> best hit per query.
/// Deterministic for any thread count.
SearchResult search(const Corpus& queries, const SeqRecord& subject, const SearchParams& params = {});

void write_hit_report(const SearchResult& result, const SearchParams& params, std::ostream& out);
void write_tally(const SearchResult& result, std::ostream& out, bool with_header = true);

}  // namespace mirkit
