#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mirkit/format.hpp"
#include "mirkit/genome.hpp"
#include "mirkit/search.hpp"
#include "oracles.hpp"

using namespace mirkit;

namespace {

const ScoringScheme kScheme{};
const std::string kLet7 = "UGAGGUAGUAGGUUGUAUAGU";

SeqRecord make_record(const std::string& id, const std::string& seq, SeqKind kind) {
    SeqRecord rec;
    rec.id = id;
    rec.species = species_from_id(id);
    rec.kind = kind;
    rec.residues = NucleotideString::from_validated(seq);
    return rec;
}

Corpus single_query_corpus(const std::string& seq) {
    auto rec = make_record("bmo-let-7", seq, SeqKind::Precursor);
    MatureAnnotation ann{"bmo-let-7", "bmo-let-7", 1, seq.size()};
    return Corpus::assemble({rec}, {ann});
}

}  // namespace

TEST_CASE("kmer index windows and N handling") {
    KmerIndex idx("ACGUACGU", 7);
    CHECK(idx.positions("ACGUACG") != nullptr);
    CHECK(idx.positions("CGUACGU") != nullptr);
    CHECK(idx.distinct_words() == 2);
    CHECK(idx.positions("ACGUACG")->front() == 1);

    KmerIndex with_n("ACGNACGUACGU", 7);
    // Windows overlapping the N are absent.
    CHECK(with_n.positions("ACGNACG") == nullptr);
    CHECK(with_n.positions("ACGUACG") != nullptr);
    CHECK(with_n.positions("ACGUACG")->front() == 5);

    CHECK_THROWS_AS(KmerIndex("ACG", 7), Error);
    CHECK_THROWS_AS(KmerIndex("ACGUACGU", 2), Error);
}

TEST_CASE("index positions always point at their word") {
    std::mt19937_64 rng(11);
    std::string subject = oracles::random_sequence(rng, 500);
    subject[100] = 'N';
    KmerIndex idx(subject, 7);
    for (std::size_t p = 0; p + 7 <= subject.size(); ++p) {
        std::string_view w = std::string_view(subject).substr(p, 7);
        if (w.find('N') != std::string_view::npos) continue;
        const auto* positions = idx.positions(w);
        REQUIRE(positions != nullptr);
        CHECK(std::find(positions->begin(), positions->end(), static_cast<std::uint32_t>(p + 1)) !=
              positions->end());
    }
}

TEST_CASE("seed_hits equals the brute-force all-pairs scan") {
    std::mt19937_64 rng(12);
    std::string subject = oracles::random_sequence(rng, 1000);
    subject.replace(400, kLet7.size(), kLet7);
    KmerIndex idx(subject, 7);

    auto seeds = seed_hits(kLet7, idx, Strand::Forward);
    auto expected = oracles::scan_seeds(kLet7, subject, 7);
    std::sort(expected.begin(), expected.end(),
              [](auto& a, auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });
    REQUIRE(seeds.size() == expected.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CHECK(seeds[i].query_pos == expected[i].first);
        CHECK(seeds[i].subject_pos == expected[i].second);
    }
    // The planted diagonal contributes its 15 consecutive seeds.
    std::size_t diagonal = 0;
    for (const auto& s : seeds)
        if (s.subject_pos - s.query_pos == 400) ++diagonal;
    CHECK(diagonal == 15);
}

TEST_CASE("seed_hits strand handling") {
    std::mt19937_64 rng(13);
    std::string subject = oracles::random_sequence(rng, 300);
    subject.replace(120, kLet7.size(), reverse_complement(kLet7));
    KmerIndex idx(subject, 7);

    auto forward = seed_hits(kLet7, idx, Strand::Forward);
    auto reverse = seed_hits(kLet7, idx, Strand::ReverseComplement);
    std::size_t diagonal = 0;
    for (const auto& s : reverse)
        if (s.subject_pos >= 121 && s.subject_pos <= 121 + 14) ++diagonal;
    CHECK(diagonal == 15);
    for (const auto& s : reverse) CHECK(s.strand == Strand::ReverseComplement);
    // The forward strand has no planted diagonal (chance seeds only).
    for (const auto& s : forward) CHECK(s.subject_pos != 121);

    std::istringstream unused("");
    KmerIndex tiny("ACGUACGUAC", 7);
    CHECK(seed_hits("GGGGGGGG", tiny, Strand::Forward).empty());
}

TEST_CASE("extend_hit covers planted extents") {
    std::mt19937_64 rng(14);
    std::string subject = oracles::random_sequence(rng, 400);

    SUBCASE("exact plant extends to the full 21 columns") {
        subject.replace(200, kLet7.size(), kLet7);
        auto al = extend_hit(SeedMatch{8, 208, Strand::Forward}, kLet7, subject, kScheme, 20);
        CHECK(al.score == 105);
        CHECK(al.identities == 21);
        CHECK(al.a_start == 1);
        CHECK(al.a_end == 21);
        CHECK(al.b_start == 201);
        CHECK(al.b_end == 221);
        CHECK(al.score == oracles::best_extent_score(kLet7, subject, 8, 208, 7, kScheme));
    }

    SUBCASE("one central substitution costs one mismatch") {
        std::string mutated = kLet7;
        mutated[10] = mutated[10] == 'A' ? 'C' : 'A';
        subject.replace(200, mutated.size(), mutated);
        auto al = extend_hit(SeedMatch{1, 201, Strand::Forward}, kLet7, subject, kScheme, 20);
        CHECK(al.score == 96);
        CHECK(al.mismatches == 1);
        CHECK(al.identities == 20);
        CHECK(al.a_start == 1);
        CHECK(al.a_end == 21);
        CHECK(al.score == oracles::best_extent_score(kLet7, subject, 1, 201, 7, kScheme));
    }

    SUBCASE("flanking mismatches stop the extension at the seed") {
        // Subject shares exactly the seed 7-mer; both flanks differ everywhere.
        std::string q = "CCCCCCCACGUACGCCCCCCC";
        std::string s = "GGGGGGGACGUACGGGGGGGG";
        auto al = extend_hit(SeedMatch{8, 8, Strand::Forward}, q, s, kScheme, 20);
        CHECK(al.score == 35);
        CHECK(al.length() == 7);
        CHECK(al.a_start == 8);
        CHECK(al.a_end == 14);
    }
}

TEST_CASE("extend_hit on the reverse strand works in rc-query coordinates") {
    std::mt19937_64 rng(15);
    std::string subject = oracles::random_sequence(rng, 300);
    subject.replace(150, kLet7.size(), reverse_complement(kLet7));

    // Seeds for the reverse strand index into the reverse-complemented query.
    KmerIndex idx(subject, 7);
    auto seeds = seed_hits(kLet7, idx, Strand::ReverseComplement);
    const SeedMatch* planted = nullptr;
    for (const auto& s : seeds)
        if (s.subject_pos >= 151 && s.subject_pos <= 165 &&
            s.subject_pos - s.query_pos == 150) planted = &s;
    REQUIRE(planted != nullptr);

    auto al = extend_hit(*planted, kLet7, subject, kScheme, 20);
    CHECK(al.score == 105);
    CHECK(al.b_start == 151);
    CHECK(al.b_end == 171);
    // The a side is the reverse complement of the query.
    CHECK(al.aligned_a == reverse_complement(kLet7));
}

TEST_CASE("evalue formatting") {
    CHECK(format_evalue(3.8753e-4) == "3.88e-04");
    CHECK(format_evalue(0.5) == "0.5");
    CHECK(format_evalue(259.0) == "259");
    CHECK(format_evalue(0.0) == "0");
}

TEST_CASE("calibration lambda") {
    ScoringScheme unit{1, -1, 2, 1};
    auto params = calibrate(unit);
    CHECK(params.lambda == doctest::Approx(std::log(3.0)).epsilon(1e-9));

    auto def = calibrate(kScheme);
    // Substituting back satisfies the defining equation to 1e-9.
    double sum = 0.25 * std::exp(5 * def.lambda) + 0.75 * std::exp(-4 * def.lambda);
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(def.k == doctest::Approx(0.1));

    ScoringScheme bad{1, 0, 1, 1};
    bad.mismatch = 0;
    CHECK_THROWS_AS(calibrate(bad), Error);
}

TEST_CASE("e_value formula") {
    auto params = calibrate(kScheme);
    double previous = e_value(30, 21, 100000, params);
    for (int s = 31; s < 120; ++s) {
        double current = e_value(s, 21, 100000, params);
        CHECK(current < previous);
        previous = current;
    }
    CHECK(e_value(50, 21, 200000, params) ==
          doctest::Approx(2 * e_value(50, 21, 100000, params)));
    // Score 105, m=21, n=1e5, k=0.1 lands near 3.9e-4.
    CHECK(e_value(105, 21, 100000, params) == doctest::Approx(3.9e-4).epsilon(0.02));
}

TEST_CASE("mature overlap filter") {
    SearchHit hit;
    hit.q_start = 1;
    hit.q_end = 21;
    hit.strand = Strand::Forward;
    hit.alignment.aligned_a = std::string(21, 'A');
    hit.alignment.aligned_b = std::string(21, 'A');
    hit.alignment.a_start = 1;
    hit.alignment.a_end = 21;

    MatureAnnotation ann{"q", "m", 1, 21};
    auto full = mature_overlap_filter(hit, ann);
    CHECK(full.keep);
    CHECK(full.overlap == 21);

    MatureAnnotation loop{"q", "m", 40, 60};
    auto miss = mature_overlap_filter(hit, loop);
    CHECK_FALSE(miss.keep);

    MatureAnnotation edge{"q", "m", 21, 40};
    auto one = mature_overlap_filter(hit, edge);
    CHECK(one.keep);
    CHECK(one.overlap == 1);
}

TEST_CASE("length difference filter boundary") {
    CHECK(length_diff_filter(22, 22));
    CHECK(length_diff_filter(22, 24));
    CHECK_FALSE(length_diff_filter(22, 25));
}

TEST_CASE("classification rules") {
    MatureAnnotation ann{"q", "m", 1, 21};
    SearchHit hit;
    hit.q_start = 1;
    hit.q_end = 21;
    hit.strand = Strand::Forward;
    hit.alignment.aligned_a = std::string(21, 'A');
    hit.alignment.aligned_b = std::string(21, 'A');
    hit.alignment.identities = 21;

    CHECK(classify_match(&hit, ann) == MatchClass::Exact);
    hit.alignment.mismatches = 2;
    CHECK(classify_match(&hit, ann) == MatchClass::TwoMismatch);
    hit.alignment.mismatches = 3;
    CHECK(classify_match(&hit, ann) == MatchClass::NotSignificant);
    hit.alignment.mismatches = 0;
    hit.alignment.gap_columns = 1;
    CHECK(classify_match(&hit, ann) == MatchClass::OneMismatch);  // gaps count as deviations
    CHECK(classify_match(nullptr, ann) == MatchClass::NotSignificant);

    hit.alignment.gap_columns = 0;
    hit.q_start = 3;  // partial mature coverage
    CHECK(classify_match(&hit, ann) == MatchClass::NotSignificant);
}

TEST_CASE("search finds a planted query exactly once") {
    GenomeRecipe recipe;
    recipe.length = 100000;
    recipe.seed = 42;
    recipe.plants.push_back(
        Plant{"bmo-let-7", NucleotideString::from_validated(kLet7), 75213, Strand::Forward, {}});
    auto genome = generate_genome(recipe);

    auto corpus = single_query_corpus(kLet7);
    auto result = search(corpus, genome);
    REQUIRE(result.queries.size() == 1);
    REQUIRE(result.queries[0].best.has_value());
    const auto& hit = *result.queries[0].best;
    CHECK(result.queries[0].match_class == MatchClass::Exact);
    CHECK(hit.alignment.b_start == 75213);
    CHECK(hit.alignment.b_end == 75233);
    CHECK(hit.alignment.identities == 21);
    CHECK(hit.alignment.score == 105);
    CHECK(hit.strand == Strand::Forward);
    CHECK(hit.evalue <= 10.0);
    CHECK(result.tally.exact == 1);
    CHECK(result.tally.total() == 1);
}

TEST_CASE("strand involution: reverse-complement plant equals forward search of the rc query") {
    GenomeRecipe recipe;
    recipe.length = 50000;
    recipe.seed = 77;
    recipe.plants.push_back(Plant{"bmo-let-7", NucleotideString::from_validated(kLet7), 20001,
                                  Strand::ReverseComplement, {}});
    auto genome = generate_genome(recipe);

    SearchParams reverse_only;
    reverse_only.forward = false;
    auto rc_result = search(single_query_corpus(kLet7), genome, reverse_only);

    SearchParams forward_only;
    forward_only.reverse = false;
    auto fwd_result = search(single_query_corpus(reverse_complement(kLet7)), genome, forward_only);

    REQUIRE(rc_result.queries[0].best.has_value());
    REQUIRE(fwd_result.queries[0].best.has_value());
    const auto& a = *rc_result.queries[0].best;
    const auto& b = *fwd_result.queries[0].best;
    CHECK(a.alignment.b_start == b.alignment.b_start);
    CHECK(a.alignment.b_end == b.alignment.b_end);
    CHECK(a.alignment.score == b.alignment.score);
    CHECK(a.strand == Strand::ReverseComplement);
    CHECK(b.strand == Strand::Forward);
    CHECK(a.alignment.b_start == 20001);
}

TEST_CASE("hits outside the mature span are discarded") {
    // Precursor: mature head + loop; only the loop is planted in the subject.
    std::string mature = "ACGUGGCAUCGAUGCAAUGG";      // 20nt
    std::string loop = "UUUGGAUCCGGAAUCCGGAUCCAAAGG";  // 27nt
    std::string precursor = mature + loop;
    auto rec = make_record("syn-mir-9", precursor, SeqKind::Precursor);
    MatureAnnotation ann{"syn-mir-9", "syn-miR-9", 1, mature.size()};
    auto corpus = Corpus::assemble({rec}, {ann});

    GenomeRecipe recipe;
    recipe.length = 30000;
    recipe.seed = 5;
    recipe.plants.push_back(
        Plant{"loop", NucleotideString::from_validated(loop), 12000, Strand::Forward, {}});
    auto genome = generate_genome(recipe);

    auto result = search(corpus, genome);
    CHECK(result.queries[0].match_class == MatchClass::NotSignificant);
    CHECK(result.tally.not_significant == 1);
}

TEST_CASE("queries sharing no 7-mer with the subject are all not significant") {
    std::vector<SeqRecord> records;
    std::vector<MatureAnnotation> anns;
    for (int i = 0; i < 10; ++i) {
        std::string seq;
        std::mt19937_64 rng(100 + i);
        seq = oracles::random_sequence(rng, 21);
        // Replace every A so the all-A subject shares no word.
        for (auto& c : seq)
            if (c == 'A') c = 'C';
        records.push_back(make_record("syn-mir-" + std::to_string(i), seq, SeqKind::Precursor));
        anns.push_back(MatureAnnotation{"syn-mir-" + std::to_string(i),
                                        "syn-miR-" + std::to_string(i), 1, seq.size()});
    }
    auto corpus = Corpus::assemble(records, anns);
    auto subject = make_record("sub-genome", std::string(5000, 'A'), SeqKind::Genome);

    auto result = search(corpus, subject);
    CHECK(result.tally.not_significant == 10);
    CHECK(result.tally.total() == 10);
    for (const auto& qr : result.queries) CHECK_FALSE(qr.best.has_value());
}

TEST_CASE("per-class tallies always partition the query set") {
    GenomeRecipe recipe;
    recipe.length = 80000;
    recipe.seed = 9;
    recipe.plants.push_back(
        Plant{"bmo-let-7", NucleotideString::from_validated(kLet7), 40001, Strand::Forward, {}});
    auto genome = generate_genome(recipe);

    std::vector<SeqRecord> records{make_record("bmo-let-7", kLet7, SeqKind::Precursor)};
    std::vector<MatureAnnotation> anns{MatureAnnotation{"bmo-let-7", "bmo-let-7", 1, 21}};
    std::mt19937_64 rng(200);
    for (int i = 0; i < 7; ++i) {
        std::string seq = oracles::random_sequence(rng, 22);
        records.push_back(make_record("syn-mir-" + std::to_string(i), seq, SeqKind::Precursor));
        anns.push_back(MatureAnnotation{"syn-mir-" + std::to_string(i),
                                        "syn-miR-" + std::to_string(i), 1, 22});
    }
    auto corpus = Corpus::assemble(records, anns);
    auto result = search(corpus, genome);
    CHECK(result.tally.total() == 8);
    CHECK(result.queries.size() == 8);

    // E-monotonicity: higher scores never carry higher E-values.
    std::vector<std::pair<int, double>> scored;
    for (const auto& qr : result.queries)
        if (qr.best) scored.emplace_back(qr.best->alignment.score, qr.best->evalue);
    for (const auto& [s1, e1] : scored)
        for (const auto& [s2, e2] : scored)
            if (s1 > s2) CHECK(e1 <= e2);
}

TEST_CASE("search is deterministic across thread counts") {
    GenomeRecipe recipe;
    recipe.length = 60000;
    recipe.seed = 21;
    recipe.plants.push_back(
        Plant{"bmo-let-7", NucleotideString::from_validated(kLet7), 30000, Strand::Forward, {}});
    auto genome = generate_genome(recipe);

    std::vector<SeqRecord> records;
    std::vector<MatureAnnotation> anns;
    std::mt19937_64 rng(300);
    records.push_back(make_record("bmo-let-7", kLet7, SeqKind::Precursor));
    anns.push_back(MatureAnnotation{"bmo-let-7", "bmo-let-7", 1, 21});
    for (int i = 0; i < 6; ++i) {
        records.push_back(
            make_record("syn-mir-" + std::to_string(i), oracles::random_sequence(rng, 60),
                        SeqKind::Precursor));
        anns.push_back(MatureAnnotation{"syn-mir-" + std::to_string(i),
                                        "syn-miR-" + std::to_string(i), 10, 31});
    }
    auto corpus = Corpus::assemble(records, anns);

    SearchParams single;
    SearchParams quad;
    quad.threads = 4;
    auto r1 = search(corpus, genome, single);
    auto r4 = search(corpus, genome, quad);
    std::ostringstream o1, o4;
    write_hit_report(r1, single, o1);
    write_hit_report(r4, single, o4);
    CHECK(o1.str() == o4.str());
}

TEST_CASE("planted-motif recall on large subjects") {
    std::mt19937_64 rng(555);
    const std::size_t lengths[] = {1000000, 200000, 200000};
    for (std::size_t len : lengths) {
        std::size_t qlen = 18 + rng() % 8;
        std::string query = oracles::random_sequence(rng, qlen);
        std::size_t offset = 1 + rng() % (len - qlen);

        GenomeRecipe recipe;
        recipe.length = len;
        recipe.seed = rng();
        recipe.plants.push_back(
            Plant{"probe", NucleotideString::from_validated(query), offset, Strand::Forward, {}});
        auto genome = generate_genome(recipe);

        auto rec = make_record("syn-probe", query, SeqKind::Precursor);
        auto corpus =
            Corpus::assemble({rec}, {MatureAnnotation{"syn-probe", "syn-probe-mat", 1, qlen}});
        auto result = search(corpus, genome);
        REQUIRE(result.queries[0].best.has_value());
        CHECK(result.queries[0].match_class == MatchClass::Exact);
        CHECK(result.queries[0].best->alignment.b_start == offset);
        CHECK(result.queries[0].best->alignment.b_end == offset + qlen - 1);
    }
}

TEST_CASE("gapped rescoring keeps exact hits intact") {
    GenomeRecipe recipe;
    recipe.length = 40000;
    recipe.seed = 31337;
    recipe.plants.push_back(
        Plant{"bmo-let-7", NucleotideString::from_validated(kLet7), 12345, Strand::Forward, {}});
    auto genome = generate_genome(recipe);

    SearchParams params;
    params.gapped_rescore = true;
    auto result = search(single_query_corpus(kLet7), genome, params);
    REQUIRE(result.queries[0].best.has_value());
    CHECK(result.queries[0].match_class == MatchClass::Exact);
    CHECK(result.queries[0].best->alignment.b_start == 12345);
    CHECK(result.queries[0].best->alignment.score == 105);
}

TEST_CASE("search validates inputs") {
    auto subject = make_record("sub", std::string(1000, 'A'), SeqKind::Genome);
    auto no_ann = Corpus::assemble({make_record("x-mir-1", std::string(40, 'C'), SeqKind::Precursor)}, {});
    CHECK_THROWS_AS(search(no_ann, subject), Error);

    Corpus empty;
    CHECK_THROWS_AS(search(empty, subject), Error);
}
