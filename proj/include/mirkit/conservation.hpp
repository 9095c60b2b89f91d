#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mirkit/msa.hpp"
#include "mirkit/seq.hpp"

namespace mirkit {

inline constexpr double kDefaultTau = 0.9;
inline constexpr std::size_t kDefaultMinBlockLength = 15;
inline constexpr std::size_t kNearDistance = 2;

/// Per-column majority-residue fraction: count of the most frequent residue
/// (gaps match nothing) divided by the row count.
struct ConservationProfile {
    std::vector<double> scores;
};

ConservationProfile conservation_profile(const Msa& msa);

struct ConservedBlock {
    std::size_t start_col = 0, end_col = 0;  // 1-based inclusive MSA columns
    double mean_score = 0.0;

    struct RowSlice {
        std::string id;
        std::size_t seq_start = 0, seq_end = 0;  // 1-based; 0,0 when all-gap
        std::string subsequence;                 // degapped slice
    };
    std::vector<RowSlice> rows;

    std::size_t length() const noexcept { return end_col - start_col + 1; }
};

/// Maximal runs of columns scoring >= tau with length >= min_length, left to
/// right, with per-row degapped slices attached.
std::vector<ConservedBlock> conserved_blocks(const Msa& msa, const ConservationProfile& profile,
                                             double tau = kDefaultTau,
                                             std::size_t min_length = kDefaultMinBlockLength);

enum class Relation { Inside, Near, Outside };

std::string_view to_string(Relation relation);

struct MatureLocalization {
    std::string mature_id;
    int block_index = 0;        // 1-based; 0 = none
    Relation relation = Relation::Outside;
    std::size_t offset = 0;     // columns beyond the block edge for Near
};

/// Maps the mature span through the row's gap structure onto MSA columns and
/// applies the Inside / Near(<=2) / Outside trichotomy.
MatureLocalization localize_mature(const Msa& msa, const std::vector<ConservedBlock>& blocks,
                                   const MatureAnnotation& ann);

struct ConservationStats {
    double pct_inside = 0.0;
    double pct_near = 0.0;
    double pct_outside = 0.0;
    std::size_t n = 0;
};

/// Percentages over the localizations, reported to one decimal.
ConservationStats conservation_stats(const std::vector<MatureLocalization>& localizations);

struct MultiRegionReport {
    std::string family;
    std::size_t block_count = 0;

    struct Occupancy {
        int block_index = 0;
        std::vector<std::string> mature_ids;  // empty = no mature occupant
    };
    std::vector<Occupancy> blocks;
};

/// Anomaly report for families with two or more conserved regions, naming
/// which block holds which mature (Inside localizations only).
std::optional<MultiRegionReport> detect_multi_region(
    std::string_view family, const std::vector<ConservedBlock>& blocks,
    const std::vector<MatureLocalization>& localizations);

void write_block_report(std::string_view family, const std::vector<ConservedBlock>& blocks,
                        std::ostream& out);
void write_localizations(std::string_view family,
                         const std::vector<MatureLocalization>& localizations, std::ostream& out);
void write_stats(const ConservationStats& stats, std::ostream& out);
void write_anomalies(const std::optional<MultiRegionReport>& report, std::ostream& out);

}  // namespace mirkit
