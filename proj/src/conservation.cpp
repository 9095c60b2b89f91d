#include "mirkit/conservation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "mirkit/format.hpp"

namespace mirkit {

ConservationProfile conservation_profile(const Msa& msa) {
    if (msa.depth() == 0 || msa.columns() == 0)
        throw make_error(Errc::empty_input, "conservation profile of an empty alignment");
    ConservationProfile profile;
    profile.scores.resize(msa.columns());
    for (std::size_t c = 0; c < msa.columns(); ++c) {
        std::array<std::size_t, 5> counts{};
        for (const auto& row : msa.rows) {
            int idx = residue_index(row[c]);
            if (idx < 5) ++counts[idx];
        }
        profile.scores[c] = static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
                            static_cast<double>(msa.depth());
    }
    return profile;
}

std::vector<ConservedBlock> conserved_blocks(const Msa& msa, const ConservationProfile& profile,
                                             double tau, std::size_t min_length) {
    if (tau <= 0.0 || tau > 1.0)
        throw make_error(Errc::invalid_argument, "tau must be in (0, 1]");
    if (min_length < 1) throw make_error(Errc::invalid_argument, "minimum block length must be >= 1");

    std::vector<ConservedBlock> blocks;
    const std::size_t n = profile.scores.size();
    std::size_t c = 0;
    while (c < n) {
        if (profile.scores[c] < tau) {
            ++c;
            continue;
        }
        std::size_t end = c;
        while (end + 1 < n && profile.scores[end + 1] >= tau) ++end;
        if (end - c + 1 >= min_length) {
            ConservedBlock block;
            block.start_col = c + 1;
            block.end_col = end + 1;
            double total = 0.0;
            for (std::size_t k = c; k <= end; ++k) total += profile.scores[k];
            block.mean_score = total / static_cast<double>(block.length());

            for (std::size_t r = 0; r < msa.depth(); ++r) {
                ConservedBlock::RowSlice slice;
                slice.id = msa.ids[r];
                std::size_t pos = 0;
                for (std::size_t k = 0; k < msa.columns() && k <= end; ++k) {
                    if (msa.rows[r][k] == '-') continue;
                    ++pos;
                    if (k >= c) {
                        if (slice.seq_start == 0) slice.seq_start = pos;
                        slice.seq_end = pos;
                        slice.subsequence.push_back(msa.rows[r][k]);
                    }
                }
                block.rows.push_back(std::move(slice));
            }
            blocks.push_back(std::move(block));
        }
        c = end + 1;
    }
    return blocks;
}

std::string_view to_string(Relation relation) {
    switch (relation) {
        case Relation::Inside: return "inside";
        case Relation::Near: return "near";
        case Relation::Outside: return "outside";
    }
    return "?";
}

MatureLocalization localize_mature(const Msa& msa, const std::vector<ConservedBlock>& blocks,
                                   const MatureAnnotation& ann) {
    int row = msa.row_of(ann.precursor_id);
    if (row < 0)
        throw make_error(Errc::dangling_annotation,
                         "annotation '" + ann.mature_id + "' references no alignment row", 0, 0,
                         ann.mature_id);

    MatureLocalization loc;
    loc.mature_id = ann.mature_id;
    const std::size_t c1 = msa.column_of(static_cast<std::size_t>(row), ann.start);
    const std::size_t c2 = msa.column_of(static_cast<std::size_t>(row), ann.end);

    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].start_col <= c1 && c2 <= blocks[b].end_col) {
            loc.block_index = static_cast<int>(b + 1);
            loc.relation = Relation::Inside;
            loc.offset = 0;
            return loc;
        }
    }
    // Near: the span sticks out of a block by at most kNearDistance columns
    // on either side; report the smallest such overhang.
    std::size_t best_offset = kNearDistance + 1;
    int best_block = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& blk = blocks[b];
        std::size_t left = blk.start_col > c1 ? blk.start_col - c1 : 0;
        std::size_t right = c2 > blk.end_col ? c2 - blk.end_col : 0;
        std::size_t overhang = std::max(left, right);
        if (overhang <= kNearDistance && overhang < best_offset) {
            best_offset = overhang;
            best_block = static_cast<int>(b + 1);
        }
    }
    if (best_block > 0) {
        loc.block_index = best_block;
        loc.relation = Relation::Near;
        loc.offset = best_offset;
        return loc;
    }
    loc.relation = Relation::Outside;
    return loc;
}

ConservationStats conservation_stats(const std::vector<MatureLocalization>& localizations) {
    if (localizations.empty())
        throw make_error(Errc::empty_input, "no localizations to aggregate");
    ConservationStats stats;
    stats.n = localizations.size();
    std::size_t inside = 0, near = 0, outside = 0;
    for (const auto& loc : localizations) {
        switch (loc.relation) {
            case Relation::Inside: ++inside; break;
            case Relation::Near: ++near; break;
            case Relation::Outside: ++outside; break;
        }
    }
    const double n = static_cast<double>(stats.n);
    stats.pct_inside = 100.0 * static_cast<double>(inside) / n;
    stats.pct_near = 100.0 * static_cast<double>(near) / n;
    stats.pct_outside = 100.0 * static_cast<double>(outside) / n;
    return stats;
}

std::optional<MultiRegionReport> detect_multi_region(
    std::string_view family, const std::vector<ConservedBlock>& blocks,
    const std::vector<MatureLocalization>& localizations) {
    if (blocks.size() < 2) return std::nullopt;
    MultiRegionReport report;
    report.family = std::string(family);
    report.block_count = blocks.size();
    report.blocks.resize(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b)
        report.blocks[b].block_index = static_cast<int>(b + 1);
    for (const auto& loc : localizations)
        if (loc.relation == Relation::Inside && loc.block_index > 0)
            report.blocks[static_cast<std::size_t>(loc.block_index - 1)].mature_ids.push_back(
                loc.mature_id);
    return report;
}

void write_block_report(std::string_view family, const std::vector<ConservedBlock>& blocks,
                        std::ostream& out) {
    out << "# mirkit conserved blocks\n";
    out << "# family\tblock_index\tmsa_start\tmsa_end\tlength\tmean_score\n";
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& blk = blocks[b];
        out << family << '\t' << (b + 1) << '\t' << blk.start_col << '\t' << blk.end_col << '\t'
            << blk.length() << '\t' << format_fixed(blk.mean_score, 4) << '\n';
        for (const auto& row : blk.rows)
            out << row.id << '\t' << row.seq_start << '\t' << row.seq_end << '\t'
                << row.subsequence << '\n';
    }
}

void write_localizations(std::string_view family,
                         const std::vector<MatureLocalization>& localizations, std::ostream& out) {
    out << "# mirkit mature localizations\n";
    out << "# mature_id\tfamily\trelation\tblock_index\toffset\n";
    for (const auto& loc : localizations) {
        out << loc.mature_id << '\t' << family << '\t' << to_string(loc.relation) << '\t';
        if (loc.block_index > 0)
            out << loc.block_index;
        else
            out << '.';
        out << '\t';
        if (loc.relation == Relation::Near)
            out << loc.offset;
        else if (loc.relation == Relation::Inside)
            out << 0;
        else
            out << '.';
        out << '\n';
    }
}

void write_stats(const ConservationStats& stats, std::ostream& out) {
    out << "# mirkit conservation stats\n";
    out << "# inside_pct\tnear_pct\toutside_pct\tn\n";
    out << format_fixed(stats.pct_inside, 1) << '\t' << format_fixed(stats.pct_near, 1) << '\t'
        << format_fixed(stats.pct_outside, 1) << '\t' << stats.n << '\n';
}

void write_anomalies(const std::optional<MultiRegionReport>& report, std::ostream& out) {
    out << "# mirkit multi-region anomalies\n";
    out << "# family\tblock_count\tblock_index\toccupants\n";
    if (!report) return;
    for (const auto& block : report->blocks) {
        out << report->family << '\t' << report->block_count << '\t' << block.block_index << '\t';
        if (block.mature_ids.empty()) {
            out << "none";
        } else {
            for (std::size_t i = 0; i < block.mature_ids.size(); ++i) {
                if (i) out << ',';
                out << block.mature_ids[i];
            }
        }
        out << '\n';
    }
}

}  // namespace mirkit
