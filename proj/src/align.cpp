#include "mirkit/align.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>

#include "mirkit/seq.hpp"

namespace mirkit {

void ScoringScheme::validate() const {
    if (match <= 0) throw make_error(Errc::invalid_argument, "match score must be positive");
    if (mismatch >= 0) throw make_error(Errc::invalid_argument, "mismatch score must be negative");
    if (gap_open < 0 || gap_extend < 0)
        throw make_error(Errc::invalid_argument, "gap penalties must be non-negative");
    if (expected_score() >= 0)
        throw make_error(Errc::nonnegative_expected_score,
                         "expected score under uniform background must be negative");
}

namespace {

constexpr std::size_t kMaxDpLength = 10000;

// Traceback byte layout: bits 0-1 M provenance (0 start, 1 M, 2 Y, 3 X),
// bits 2-3 X provenance (1 extend, 2 M, 3 Y), bits 4-5 Y provenance
// (1 extend, 2 M, 3 X). States: M consumes both; X consumes a (gap in b);
// Y consumes b (gap in a). Tie preference is M > Y > X, and extension over
// a new open inside the gap states.
struct TracePath {
    std::vector<std::pair<std::size_t, std::size_t>> columns;  // 1-based, 0 = gap
    std::size_t a_start = 0, a_end = 0, b_start = 0, b_end = 0;
};

template <typename S>
struct DpOutcome {
    S score{};
    bool empty = false;
    TracePath path;
};

template <typename S, typename ColScore>
DpOutcome<S> run_gotoh(std::size_t n, std::size_t m, ColScore col_score, S open, S ext,
                       bool local) {
    if (n > kMaxDpLength || m > kMaxDpLength)
        throw make_error(Errc::invalid_argument,
                         "full-matrix alignment limited to 10000 columns per sequence");

    const S NEG = std::numeric_limits<S>::lowest() / 4;
    const std::size_t w = m + 1;
    std::vector<std::uint8_t> tb((n + 1) * w, 0);
    std::vector<S> mPrev(w), xPrev(w), yPrev(w), mCur(w), xCur(w), yCur(w);

    mPrev[0] = 0;
    xPrev[0] = yPrev[0] = NEG;
    for (std::size_t j = 1; j <= m; ++j) {
        mPrev[j] = NEG;
        xPrev[j] = NEG;
        yPrev[j] = local ? NEG : -(open + static_cast<S>(j) * ext);
        if (!local) tb[j] = static_cast<std::uint8_t>((j == 1 ? 2 : 1) << 4);
    }

    S best = 0;
    std::size_t best_i = 0, best_j = 0;
    bool have_best = false;

    for (std::size_t i = 1; i <= n; ++i) {
        mCur[0] = NEG;
        yCur[0] = NEG;
        xCur[0] = local ? NEG : -(open + static_cast<S>(i) * ext);
        if (!local) tb[i * w] = static_cast<std::uint8_t>((i == 1 ? 2 : 1) << 2);
        for (std::size_t j = 1; j <= m; ++j) {
            // M: diagonal, preference M > Y > X among predecessors. Local
            // alignments may start fresh at any cell (provenance 0).
            S pred = mPrev[j - 1];
            std::uint8_t mprov = 1;
            if (yPrev[j - 1] > pred) { pred = yPrev[j - 1]; mprov = 2; }
            if (xPrev[j - 1] > pred) { pred = xPrev[j - 1]; mprov = 3; }
            S mval;
            if (local) {
                if (pred <= 0) {
                    pred = 0;
                    mprov = 0;
                }
                mval = pred + col_score(i, j);
            } else {
                mval = pred <= NEG / 2 ? NEG : pred + col_score(i, j);
            }
            // X: consume a; prefer extension over reopening.
            S xval = xPrev[j] - ext;
            std::uint8_t xprov = 1;
            if (mPrev[j] - open - ext > xval) { xval = mPrev[j] - open - ext; xprov = 2; }
            if (yPrev[j] - open - ext > xval) { xval = yPrev[j] - open - ext; xprov = 3; }
            // Y: consume b.
            S yval = yCur[j - 1] - ext;
            std::uint8_t yprov = 1;
            if (mCur[j - 1] - open - ext > yval) { yval = mCur[j - 1] - open - ext; yprov = 2; }
            if (xCur[j - 1] - open - ext > yval) { yval = xCur[j - 1] - open - ext; yprov = 3; }

            mCur[j] = mval;
            xCur[j] = std::max(xval, NEG);
            yCur[j] = std::max(yval, NEG);
            tb[i * w + j] = static_cast<std::uint8_t>(mprov | (xprov << 2) | (yprov << 4));

            if (local && (!have_best || mval > best)) {
                best = mval;
                best_i = i;
                best_j = j;
                have_best = true;
            }
        }
        std::swap(mPrev, mCur);
        std::swap(xPrev, xCur);
        std::swap(yPrev, yCur);
    }

    DpOutcome<S> out;
    std::size_t i, j;
    int state;  // 0 = M, 1 = X, 2 = Y
    if (local) {
        if (!have_best || best <= 0) {
            out.score = 0;
            out.empty = true;
            return out;
        }
        out.score = best;
        i = best_i;
        j = best_j;
        state = 0;
    } else {
        // Final score at (n, m); preference M > Y > X.
        S mv = mPrev[m], xv = xPrev[m], yv = yPrev[m];
        out.score = mv;
        state = 0;
        if (yv > out.score) { out.score = yv; state = 2; }
        if (xv > out.score) { out.score = xv; state = 1; }
        i = n;
        j = m;
    }

    auto& cols = out.path.columns;
    while (i > 0 || j > 0) {
        std::uint8_t byte = tb[i * w + j];
        if (state == 0) {
            std::uint8_t prov = byte & 3u;
            cols.emplace_back(i, j);
            --i;
            --j;
            if (prov == 0) break;  // local alignment start cell
            state = prov == 1 ? 0 : prov == 2 ? 2 : 1;
        } else if (state == 1) {
            std::uint8_t prov = (byte >> 2) & 3u;
            cols.emplace_back(i, std::size_t{0});
            --i;
            state = prov == 1 ? 1 : prov == 2 ? 0 : 2;
        } else {
            std::uint8_t prov = (byte >> 4) & 3u;
            cols.emplace_back(std::size_t{0}, j);
            --j;
            state = prov == 1 ? 2 : prov == 2 ? 0 : 1;
        }
    }
    std::reverse(cols.begin(), cols.end());
    for (const auto& col : cols) {
        if (col.first) {
            if (!out.path.a_start) out.path.a_start = col.first;
            out.path.a_end = col.first;
        }
        if (col.second) {
            if (!out.path.b_start) out.path.b_start = col.second;
            out.path.b_end = col.second;
        }
    }
    return out;
}

PairwiseAlignment build_alignment(std::string_view a, std::string_view b,
                                  const DpOutcome<int>& dp) {
    PairwiseAlignment al;
    al.score = dp.score;
    if (dp.empty) return al;
    al.a_start = dp.path.a_start;
    al.a_end = dp.path.a_end;
    al.b_start = dp.path.b_start;
    al.b_end = dp.path.b_end;
    al.aligned_a.reserve(dp.path.columns.size());
    al.aligned_b.reserve(dp.path.columns.size());
    for (const auto& col : dp.path.columns) {
        char ca = col.first ? a[col.first - 1] : '-';
        char cb = col.second ? b[col.second - 1] : '-';
        al.aligned_a.push_back(ca);
        al.aligned_b.push_back(cb);
        if (ca == '-' || cb == '-') ++al.gap_columns;
        else if (ca == cb && ca != 'N') ++al.identities;
        else ++al.mismatches;
    }
    return al;
}

}  // namespace

PairwiseAlignment global_align(std::string_view a, std::string_view b,
                               const ScoringScheme& scheme) {
    if (a.empty() || b.empty())
        throw make_error(Errc::empty_sequence, "global_align requires non-empty sequences");
    auto dp = run_gotoh<int>(
        a.size(), b.size(),
        [&](std::size_t i, std::size_t j) { return scheme.score(a[i - 1], b[j - 1]); },
        scheme.gap_open, scheme.gap_extend, false);
    return build_alignment(a, b, dp);
}

PairwiseAlignment local_align(std::string_view a, std::string_view b,
                              const ScoringScheme& scheme) {
    if (a.empty() || b.empty())
        throw make_error(Errc::empty_sequence, "local_align requires non-empty sequences");
    auto dp = run_gotoh<int>(
        a.size(), b.size(),
        [&](std::size_t i, std::size_t j) { return scheme.score(a[i - 1], b[j - 1]); },
        scheme.gap_open, scheme.gap_extend, true);
    return build_alignment(a, b, dp);
}

double fractional_identity(const PairwiseAlignment& al) {
    if (al.length() == 0)
        throw make_error(Errc::empty_alignment, "fractional identity of an empty alignment");
    return static_cast<double>(al.identities) / static_cast<double>(al.length());
}

int recompute_score(const PairwiseAlignment& al, const ScoringScheme& scheme) {
    int score = 0;
    bool in_gap_a = false, in_gap_b = false;
    for (std::size_t c = 0; c < al.length(); ++c) {
        char x = al.aligned_a[c], y = al.aligned_b[c];
        if (x == '-') {
            if (!in_gap_a) score -= scheme.gap_open;
            score -= scheme.gap_extend;
            in_gap_a = true;
            in_gap_b = false;
        } else if (y == '-') {
            if (!in_gap_b) score -= scheme.gap_open;
            score -= scheme.gap_extend;
            in_gap_b = true;
            in_gap_a = false;
        } else {
            score += scheme.score(x, y);
            in_gap_a = in_gap_b = false;
        }
    }
    return score;
}

Profile::Profile(std::string id, std::string_view sequence)
    : ids_{std::move(id)}, rows_{std::string(sequence)} {}

Profile::Profile(std::vector<std::string> ids, std::vector<std::string> rows)
    : ids_(std::move(ids)), rows_(std::move(rows)) {
    for (const auto& r : rows_)
        if (r.size() != rows_[0].size())
            throw make_error(Errc::invalid_argument, "profile rows must have equal length");
}

std::array<double, 6> Profile::frequencies(std::size_t col) const {
    std::array<double, 6> f{};
    for (const auto& r : rows_) f[residue_index(r[col])] += 1.0;
    for (auto& v : f) v /= static_cast<double>(rows_.size());
    return f;
}

ProfileAlignResult profile_align(const Profile& p, const Profile& q, const ScoringScheme& scheme) {
    if (p.depth() == 0 || q.depth() == 0 || p.columns() == 0 || q.columns() == 0)
        throw make_error(Errc::empty_sequence, "profile_align requires non-empty profiles");

    // Flattened frequency tables; column score is the frequency-weighted
    // average pairwise residue score, with existing gaps charged gap_extend
    // against residues and nothing against other gaps.
    std::vector<std::array<double, 6>> fp(p.columns()), fq(q.columns());
    for (std::size_t c = 0; c < p.columns(); ++c) fp[c] = p.frequencies(c);
    for (std::size_t c = 0; c < q.columns(); ++c) fq[c] = q.frequencies(c);

    double sub[5][5];
    for (int x = 0; x < 5; ++x)
        for (int y = 0; y < 5; ++y)
            sub[x][y] = scheme.score(kResidueAlphabet[x], kResidueAlphabet[y]);

    auto col_score = [&](std::size_t i, std::size_t j) {
        const auto& a = fp[i - 1];
        const auto& b = fq[j - 1];
        double s = 0.0;
        for (int x = 0; x < 5; ++x) {
            if (a[x] == 0.0) continue;
            for (int y = 0; y < 5; ++y)
                if (b[y] != 0.0) s += a[x] * b[y] * sub[x][y];
        }
        s -= (a[5] * (1.0 - b[5]) + b[5] * (1.0 - a[5])) * scheme.gap_extend;
        return s;
    };

    auto dp = run_gotoh<double>(p.columns(), q.columns(), col_score,
                                static_cast<double>(scheme.gap_open),
                                static_cast<double>(scheme.gap_extend), false);

    ProfileAlignResult result;
    result.score = dp.score;
    result.column_map = dp.path.columns;

    std::vector<std::string> rows;
    rows.reserve(p.depth() + q.depth());
    for (const auto& r : p.rows()) {
        std::string merged;
        merged.reserve(dp.path.columns.size());
        for (const auto& col : dp.path.columns) merged.push_back(col.first ? r[col.first - 1] : '-');
        rows.push_back(std::move(merged));
    }
    for (const auto& r : q.rows()) {
        std::string merged;
        merged.reserve(dp.path.columns.size());
        for (const auto& col : dp.path.columns) merged.push_back(col.second ? r[col.second - 1] : '-');
        rows.push_back(std::move(merged));
    }
    std::vector<std::string> ids = p.member_ids();
    ids.insert(ids.end(), q.member_ids().begin(), q.member_ids().end());
    result.merged = Profile(std::move(ids), std::move(rows));
    return result;
}

}  // namespace mirkit
