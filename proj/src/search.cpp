#include "mirkit/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <ostream>

#include "mirkit/format.hpp"

namespace mirkit {

std::string_view to_string(Strand strand) {
    return strand == Strand::Forward ? "+" : "-";
}

std::string_view to_string(MatchClass mc) {
    switch (mc) {
        case MatchClass::Exact: return "exact";
        case MatchClass::OneMismatch: return "one_mismatch";
        case MatchClass::TwoMismatch: return "two_mismatch";
        case MatchClass::NotSignificant: return "not_significant";
    }
    return "?";
}

namespace {

inline int base_code(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'U': return 3;
        default: return -1;  // 'N'
    }
}

}  // namespace

KmerIndex::KmerIndex(std::string_view subject, std::size_t word_size) {
    if (word_size < 4)
        throw make_error(Errc::invalid_argument, "word size must be at least 4");
    if (word_size > 31)
        throw make_error(Errc::invalid_argument, "word size must be at most 31");
    if (subject.size() < word_size)
        throw make_error(Errc::subject_too_short,
                         "subject shorter than word size " + std::to_string(word_size));
    word_ = word_size;
    length_ = subject.size();

    const std::uint64_t mask = (std::uint64_t{1} << (2 * word_size)) - 1;
    std::uint64_t key = 0;
    std::size_t run = 0;  // N-free run length ending at the current position
    table_.reserve(std::min<std::size_t>(length_, mask + 1));
    for (std::size_t i = 0; i < subject.size(); ++i) {
        int code = base_code(subject[i]);
        if (code < 0) {
            run = 0;
            key = 0;
            continue;
        }
        key = ((key << 2) | static_cast<std::uint64_t>(code)) & mask;
        ++run;
        if (run >= word_size)
            table_[key].push_back(static_cast<std::uint32_t>(i + 2 - word_size));
    }
}

const std::vector<std::uint32_t>* KmerIndex::positions(std::string_view word) const {
    if (word.size() != word_) return nullptr;
    std::uint64_t key = 0;
    for (char c : word) {
        int code = base_code(c);
        if (code < 0) return nullptr;
        key = (key << 2) | static_cast<std::uint64_t>(code);
    }
    auto it = table_.find(key);
    return it == table_.end() ? nullptr : &it->second;
}

std::vector<SeedMatch> seed_hits(std::string_view query, const KmerIndex& index, Strand strand) {
    const std::size_t w = index.word_size();
    if (query.size() < w)
        throw make_error(Errc::invalid_argument, "query shorter than the index word size");

    std::string effective;
    std::string_view q = query;
    if (strand == Strand::ReverseComplement) {
        effective = reverse_complement(query);
        q = effective;
    }

    std::vector<SeedMatch> seeds;
    for (std::size_t qpos = 0; qpos + w <= q.size(); ++qpos) {
        std::string_view word = q.substr(qpos, w);
        if (word.find('N') != std::string_view::npos) continue;
        if (const auto* positions = index.positions(word)) {
            for (auto spos : *positions)
                seeds.push_back(SeedMatch{qpos + 1, static_cast<std::size_t>(spos), strand});
        }
    }
    std::sort(seeds.begin(), seeds.end(), [](const SeedMatch& a, const SeedMatch& b) {
        return a.subject_pos != b.subject_pos ? a.subject_pos < b.subject_pos
                                              : a.query_pos < b.query_pos;
    });
    return seeds;
}

KarlinAltschulParams calibrate(const ScoringScheme& scheme, const std::array<double, 4>& background,
                               double k) {
    double expected = 0.0, total = 0.0;
    for (double p : background) {
        if (p < 0) throw make_error(Errc::invalid_argument, "negative background probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw make_error(Errc::invalid_argument, "background probabilities must sum to 1");
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            expected += background[x] * background[y] *
                        scheme.score(kResidueAlphabet[x], kResidueAlphabet[y]);
    if (expected >= 0)
        throw make_error(Errc::nonnegative_expected_score,
                         "expected score must be negative for E-value statistics");

    auto f = [&](double lambda) {
        double s = 0.0;
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y)
                s += background[x] * background[y] *
                     std::exp(lambda * scheme.score(kResidueAlphabet[x], kResidueAlphabet[y]));
        return s - 1.0;
    };

    double lo = 0.0, hi = 10.0;
    if (f(hi) <= 0)
        throw make_error(Errc::invalid_argument, "no lambda root in (0, 10]");
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > 0)
            hi = mid;
        else
            lo = mid;
    }

    KarlinAltschulParams params;
    params.lambda = 0.5 * (lo + hi);
    params.k = k;
    params.background = background;
    return params;
}

double e_value(int score, std::size_t query_len, std::size_t subject_len,
               const KarlinAltschulParams& params) {
    return params.k * static_cast<double>(query_len) * static_cast<double>(subject_len) *
           std::exp(-params.lambda * score);
}

PairwiseAlignment extend_hit(const SeedMatch& seed, std::string_view query,
                             std::string_view subject, const ScoringScheme& scheme, int x_drop) {
    std::string effective;
    std::string_view q = query;
    if (seed.strand == Strand::ReverseComplement) {
        effective = reverse_complement(query);
        q = effective;
    }

    std::size_t qs = seed.query_pos, qe = seed.query_pos;
    std::size_t ss = seed.subject_pos;
    int score = 0;

    // Right extension, starting on the seed's first column. The seed's exact
    // matches climb monotonically, so the best extent always spans the seed.
    {
        int running = 0, best = 0;
        std::size_t best_len = 0, len = 0;
        while (seed.query_pos + len <= q.size() && seed.subject_pos + len <= subject.size()) {
            running += scheme.score(q[seed.query_pos - 1 + len], subject[seed.subject_pos - 1 + len]);
            ++len;
            if (running > best) {
                best = running;
                best_len = len;
            }
            if (running < best - x_drop) break;
        }
        score += best;
        qe = seed.query_pos + best_len - 1;
    }
    // Left extension.
    {
        int running = 0, best = 0;
        std::size_t best_len = 0, len = 0;
        while (seed.query_pos - 1 > len && seed.subject_pos - 1 > len) {
            running += scheme.score(q[seed.query_pos - 2 - len], subject[seed.subject_pos - 2 - len]);
            ++len;
            if (running > best) {
                best = running;
                best_len = len;
            }
            if (running < best - x_drop) break;
        }
        score += best;
        qs = seed.query_pos - best_len;
        ss = seed.subject_pos - best_len;
    }

    PairwiseAlignment al;
    al.a_start = qs;
    al.a_end = qe;
    al.b_start = ss;
    al.b_end = ss + (qe - qs);
    al.score = score;
    al.aligned_a = std::string(q.substr(qs - 1, qe - qs + 1));
    al.aligned_b = std::string(subject.substr(ss - 1, qe - qs + 1));
    for (std::size_t c = 0; c < al.aligned_a.size(); ++c) {
        if (al.aligned_a[c] == al.aligned_b[c] && al.aligned_a[c] != 'N')
            ++al.identities;
        else
            ++al.mismatches;
    }
    return al;
}

OverlapOutcome mature_overlap_filter(const SearchHit& hit, const MatureAnnotation& ann) {
    OverlapOutcome out;
    if (hit.alignment.empty()) return out;
    const std::size_t lo = std::max(hit.q_start, ann.start);
    const std::size_t hi = std::min(hit.q_end, ann.end);
    if (lo > hi) return out;

    // Count alignment columns that consume a query residue inside the span.
    // For the reverse strand, a-side positions run over the reverse
    // complement; map them back to forward coordinates.
    const std::size_t alen = hit.q_end - hit.q_start + 1;  // query residues in the hit
    std::size_t consumed = 0, overlap = 0;
    for (std::size_t c = 0; c < hit.alignment.length(); ++c) {
        if (hit.alignment.aligned_a[c] == '-') continue;
        ++consumed;
        std::size_t fwd = hit.strand == Strand::Forward
                              ? hit.q_start + consumed - 1
                              : hit.q_start + (alen - consumed);
        if (fwd >= ann.start && fwd <= ann.end) ++overlap;
    }
    out.keep = overlap >= 1;
    out.overlap = overlap;
    return out;
}

bool length_diff_filter(std::size_t hit_mature_len, std::size_t query_mature_len) {
    const auto a = static_cast<long long>(hit_mature_len);
    const auto b = static_cast<long long>(query_mature_len);
    return std::llabs(a - b) <= 2;
}

namespace {

/// Subject residues aligned against the query's mature span.
std::size_t hit_mature_length(const SearchHit& hit, const MatureAnnotation& ann) {
    if (hit.alignment.empty()) return 0;
    const std::size_t alen = hit.q_end - hit.q_start + 1;
    std::size_t consumed = 0, subject_len = 0;
    for (std::size_t c = 0; c < hit.alignment.length(); ++c) {
        bool in_span = false;
        if (hit.alignment.aligned_a[c] != '-') {
            ++consumed;
            std::size_t fwd = hit.strand == Strand::Forward
                                  ? hit.q_start + consumed - 1
                                  : hit.q_start + (alen - consumed);
            in_span = fwd >= ann.start && fwd <= ann.end;
        }
        if (in_span && hit.alignment.aligned_b[c] != '-') ++subject_len;
    }
    return subject_len;
}

}  // namespace

MatchClass classify_match(const SearchHit* best, const MatureAnnotation& ann) {
    if (!best || best->alignment.empty()) return MatchClass::NotSignificant;
    const bool covers = best->q_start <= ann.start && ann.end <= best->q_end;
    if (!covers) return MatchClass::NotSignificant;
    const std::size_t deviations = best->alignment.mismatches + best->alignment.gap_columns;
    switch (deviations) {
        case 0: return MatchClass::Exact;
        case 1: return MatchClass::OneMismatch;
        case 2: return MatchClass::TwoMismatch;
        default: return MatchClass::NotSignificant;
    }
}

void ClassTally::add(MatchClass mc) {
    switch (mc) {
        case MatchClass::Exact: ++exact; break;
        case MatchClass::OneMismatch: ++one_mismatch; break;
        case MatchClass::TwoMismatch: ++two_mismatch; break;
        case MatchClass::NotSignificant: ++not_significant; break;
    }
}

namespace {

struct Extent {
    std::size_t qs, qe, ss, se;  // effective-query and subject coordinates
    int score;
    Strand strand;
};

QueryResult search_one(const SeqRecord& query, const std::vector<const MatureAnnotation*>& anns,
                       const SeqRecord& subject, const KmerIndex& index,
                       const KarlinAltschulParams& ka, const SearchParams& params) {
    QueryResult result;
    result.query_id = query.id;

    const std::string& forward = query.residues.str();
    const std::string rc = reverse_complement(forward);
    const std::size_t m = forward.size();

    std::vector<Extent> extents;
    for (Strand strand : {Strand::Forward, Strand::ReverseComplement}) {
        if (strand == Strand::Forward && !params.forward) continue;
        if (strand == Strand::ReverseComplement && !params.reverse) continue;
        const std::string& eff = strand == Strand::Forward ? forward : rc;
        if (eff.size() < index.word_size()) continue;

        auto seeds = seed_hits(eff, index, Strand::Forward);
        std::vector<Extent> strand_extents;
        for (const auto& seed : seeds) {
            auto al = extend_hit(SeedMatch{seed.query_pos, seed.subject_pos, Strand::Forward}, eff,
                                 subject.residues.view(), params.scheme, params.x_drop);
            strand_extents.push_back(
                Extent{al.a_start, al.a_end, al.b_start, al.b_end, al.score, strand});
        }
        // Deduplicate: overlapping extents on the same strand collapse to the
        // highest-scoring one (15 seeds of one planted 21-mer -> 1 hit).
        std::sort(strand_extents.begin(), strand_extents.end(), [](const Extent& a, const Extent& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.ss != b.ss) return a.ss < b.ss;
            return a.qs < b.qs;
        });
        std::vector<Extent> kept;
        for (const auto& e : strand_extents) {
            bool overlapped = false;
            for (const auto& k : kept)
                if (e.ss <= k.se && k.ss <= e.se) {
                    overlapped = true;
                    break;
                }
            if (!overlapped) kept.push_back(e);
        }
        extents.insert(extents.end(), kept.begin(), kept.end());
    }

    // Build hits, applying the E-value cutoff and the two biological filters.
    std::vector<SearchHit> survivors;
    for (const auto& e : extents) {
        SearchHit hit;
        hit.query_id = query.id;
        hit.subject_id = subject.id;
        hit.strand = e.strand;
        const std::string& eff = e.strand == Strand::Forward ? forward : rc;
        auto& al = hit.alignment;
        al.a_start = e.qs;
        al.a_end = e.qe;
        al.b_start = e.ss;
        al.b_end = e.se;
        al.score = e.score;
        al.aligned_a = eff.substr(e.qs - 1, e.qe - e.qs + 1);
        al.aligned_b = std::string(subject.residues.view().substr(e.ss - 1, e.se - e.ss + 1));
        for (std::size_t c = 0; c < al.aligned_a.size(); ++c) {
            if (al.aligned_a[c] == al.aligned_b[c] && al.aligned_a[c] != 'N')
                ++al.identities;
            else
                ++al.mismatches;
        }

        if (params.gapped_rescore) {
            // Optional gapped rescoring of the extent neighbourhood.
            const std::size_t margin = eff.size();
            const std::size_t lo = e.ss > margin ? e.ss - margin : 1;
            const std::size_t hi = std::min(subject.residues.size(), e.se + margin);
            auto local = local_align(eff, subject.residues.view().substr(lo - 1, hi - lo + 1),
                                     params.scheme);
            if (!local.empty() && local.score >= hit.alignment.score) {
                local.b_start += lo - 1;
                local.b_end += lo - 1;
                hit.alignment = local;
            }
        }

        if (e.strand == Strand::Forward) {
            hit.q_start = hit.alignment.a_start;
            hit.q_end = hit.alignment.a_end;
        } else {
            hit.q_start = m - hit.alignment.a_end + 1;
            hit.q_end = m - hit.alignment.a_start + 1;
        }
        hit.evalue = e_value(hit.alignment.score, m, subject.residues.size(), ka);
        if (hit.evalue > params.e_cutoff) continue;

        // Mature filters against the annotation with the largest overlap.
        const MatureAnnotation* best_ann = nullptr;
        std::size_t best_overlap = 0;
        for (const auto* ann : anns) {
            auto outcome = mature_overlap_filter(hit, *ann);
            if (outcome.keep && outcome.overlap > best_overlap) {
                best_overlap = outcome.overlap;
                best_ann = ann;
            }
        }
        if (!best_ann) continue;
        hit.mature_overlap = best_overlap;
        if (!length_diff_filter(hit_mature_length(hit, *best_ann), best_ann->length())) continue;
        hit.match_class = classify_match(&hit, *best_ann);
        survivors.push_back(std::move(hit));
    }

    // Best hit: maximum score, then lower E, lower subject start, Forward.
    const SearchHit* best = nullptr;
    for (const auto& hit : survivors) {
        if (!best) {
            best = &hit;
            continue;
        }
        if (hit.alignment.score != best->alignment.score) {
            if (hit.alignment.score > best->alignment.score) best = &hit;
        } else if (hit.evalue != best->evalue) {
            if (hit.evalue < best->evalue) best = &hit;
        } else if (hit.alignment.b_start != best->alignment.b_start) {
            if (hit.alignment.b_start < best->alignment.b_start) best = &hit;
        } else if (hit.strand == Strand::Forward && best->strand != Strand::Forward) {
            best = &hit;
        }
    }

    if (best) {
        result.best = *best;
        result.match_class = best->match_class;
    } else {
        result.match_class = MatchClass::NotSignificant;
    }
    return result;
}

}  // namespace

SearchResult search(const Corpus& queries, const SeqRecord& subject, const SearchParams& params) {
    params.scheme.validate();
    if (params.e_cutoff <= 0)
        throw make_error(Errc::invalid_argument, "E-value cutoff must be positive");

    std::vector<const SeqRecord*> precursors;
    std::vector<std::vector<const MatureAnnotation*>> annotations;
    for (const auto& rec : queries.records()) {
        if (rec.kind != SeqKind::Precursor) continue;
        auto anns = queries.annotations_for(rec.id);
        if (anns.empty())
            throw make_error(Errc::invalid_argument,
                             "query precursor '" + rec.id + "' has no mature annotation", 0, 0,
                             rec.id);
        precursors.push_back(&rec);
        annotations.push_back(std::move(anns));
    }
    if (precursors.empty()) throw make_error(Errc::empty_input, "no queries");

    KmerIndex index(subject.residues.view(), params.word_size);
    KarlinAltschulParams ka = calibrate(params.scheme, {0.25, 0.25, 0.25, 0.25}, params.k);

    SearchResult result;
    result.subject_id = subject.id;
    result.queries.resize(precursors.size());

    const unsigned threads = std::max(1u, params.threads);
    if (threads == 1 || precursors.size() < 2) {
        for (std::size_t qi = 0; qi < precursors.size(); ++qi)
            result.queries[qi] =
                search_one(*precursors[qi], annotations[qi], subject, index, ka, params);
    } else {
        // Parallel across queries; results land in corpus order regardless of
        // worker scheduling.
        std::vector<std::future<void>> futures;
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < threads; ++t) {
            futures.push_back(std::async(std::launch::async, [&]() {
                while (true) {
                    std::size_t qi = next.fetch_add(1);
                    if (qi >= precursors.size()) break;
                    result.queries[qi] =
                        search_one(*precursors[qi], annotations[qi], subject, index, ka, params);
                }
            }));
        }
        for (auto& f : futures) f.get();
    }

    for (const auto& qr : result.queries) result.tally.add(qr.match_class);
    return result;
}

void write_hit_report(const SearchResult& result, const SearchParams& params, std::ostream& out) {
    out << "# mirkit search\n";
    out << "# word_size=" << params.word_size << " e_cutoff=" << format_number(params.e_cutoff)
        << " x_drop=" << params.x_drop << " match=" << params.scheme.match
        << " mismatch=" << params.scheme.mismatch << " gap_open=" << params.scheme.gap_open
        << " gap_extend=" << params.scheme.gap_extend << " strands="
        << (params.forward && params.reverse ? "both" : params.forward ? "forward" : "reverse")
        << " k=" << format_number(params.k) << "\n";
    out << "# subject=" << result.subject_id << "\n";
    out << "# query_id\tsubject_id\tstrand\tq_start\tq_end\ts_start\ts_end\tscore\tevalue\t"
           "mismatches\tgaps\tclass\n";
    for (const auto& qr : result.queries) {
        out << qr.query_id << '\t' << result.subject_id << '\t';
        if (qr.best) {
            const auto& hit = *qr.best;
            out << to_string(hit.strand) << '\t' << hit.q_start << '\t' << hit.q_end << '\t'
                << hit.alignment.b_start << '\t' << hit.alignment.b_end << '\t'
                << hit.alignment.score << '\t' << format_evalue(hit.evalue) << '\t'
                << hit.alignment.mismatches << '\t' << hit.alignment.gap_columns << '\t'
                << to_string(qr.match_class) << '\n';
        } else {
            out << ".\t0\t0\t0\t0\t0\t.\t0\t0\t" << to_string(qr.match_class) << '\n';
        }
    }
}

void write_tally(const SearchResult& result, std::ostream& out, bool with_header) {
    if (with_header) {
        out << "# mirkit search tally\n";
        out << "# exact\tone_mismatch\ttwo_mismatch\tnot_significant\n";
    }
    out << result.tally.exact << '\t' << result.tally.one_mismatch << '\t'
        << result.tally.two_mismatch << '\t' << result.tally.not_significant << '\n';
}

}  // namespace mirkit
