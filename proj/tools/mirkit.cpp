#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "mirkit/conservation.hpp"
#include "mirkit/format.hpp"
#include "mirkit/genome.hpp"
#include "mirkit/msa.hpp"
#include "mirkit/search.hpp"
#include "mirkit/seq.hpp"
#include "mirkit/setops.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw mirkit::make_error(mirkit::Errc::io_failure, "cannot write '" + path.string() + "'");
    writer(out);
    out.flush();
    if (!out) throw mirkit::make_error(mirkit::Errc::io_failure, "write failed for '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const json& doc) {
    write_file(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

mirkit::ScoringScheme scheme_options(CLI::App* cmd, mirkit::ScoringScheme& scheme) {
    cmd->add_option("--match", scheme.match, "Match score (default 5)");
    cmd->add_option("--mismatch", scheme.mismatch, "Mismatch score (default -4)");
    cmd->add_option("--gap-open", scheme.gap_open, "Gap open penalty (default 10)");
    cmd->add_option("--gap-extend", scheme.gap_extend, "Gap extend penalty (default 1)");
    return scheme;
}

mirkit::Corpus load_corpus(const std::string& fasta, const std::string& annotations,
                           mirkit::SeqKind kind) {
    auto records = mirkit::parse_fasta_file(fasta, kind);
    std::vector<mirkit::MatureAnnotation> anns;
    if (!annotations.empty()) anns = mirkit::parse_annotations_file(annotations);
    return mirkit::Corpus::assemble(std::move(records), std::move(anns));
}

// ---------------------------------------------------------------------------
// gen

struct GenConfig {
    std::string out;
    std::string manifest;
    std::string plant_fasta;
    std::vector<std::string> plant_specs;
    mirkit::GenomeRecipe recipe;
};

mirkit::Plant parse_plant_spec(const std::string& spec,
                               const std::vector<mirkit::SeqRecord>& sources) {
    auto parts = mirkit::split(spec, ':');
    if (parts.size() < 2 || parts.size() > 4)
        throw mirkit::make_error(mirkit::Errc::invalid_argument,
                                 "plant spec must be id:offset[:strand[:mutations]]");
    mirkit::Plant plant;
    plant.id = parts[0];
    auto it = std::find_if(sources.begin(), sources.end(),
                           [&](const mirkit::SeqRecord& r) { return r.id == plant.id; });
    if (it == sources.end())
        throw mirkit::make_error(mirkit::Errc::invalid_argument,
                                 "plant id '" + plant.id + "' not in --plant-fasta");
    plant.sequence = it->residues;
    long off = std::stol(parts[1]);
    if (off <= 0)
        throw mirkit::make_error(mirkit::Errc::invalid_argument, "plant offset must be positive");
    plant.offset = static_cast<std::size_t>(off);
    if (parts.size() >= 3 && !parts[2].empty()) {
        if (parts[2] == "+" || parts[2] == "F")
            plant.strand = mirkit::Strand::Forward;
        else if (parts[2] == "-" || parts[2] == "R")
            plant.strand = mirkit::Strand::ReverseComplement;
        else
            throw mirkit::make_error(mirkit::Errc::invalid_argument,
                                     "plant strand must be +, -, F or R");
    }
    if (parts.size() == 4 && !parts[3].empty()) {
        for (const auto& tok : mirkit::split(parts[3], ',')) {
            long pos = std::stol(tok);
            if (pos <= 0)
                throw mirkit::make_error(mirkit::Errc::invalid_argument,
                                         "mutation positions are 1-based");
            plant.mutations.push_back(static_cast<std::size_t>(pos));
        }
    }
    return plant;
}

int run_gen(const GenConfig& cfg, bool with_json) {
    mirkit::GenomeRecipe recipe = cfg.recipe;
    if (!cfg.plant_specs.empty()) {
        if (cfg.plant_fasta.empty())
            throw mirkit::make_error(mirkit::Errc::invalid_argument,
                                     "--plant requires --plant-fasta");
        auto sources = mirkit::parse_fasta_file(cfg.plant_fasta, mirkit::SeqKind::Mature);
        for (const auto& spec : cfg.plant_specs)
            recipe.plants.push_back(parse_plant_spec(spec, sources));
    }
    auto genome = mirkit::generate_genome(recipe);
    write_file(cfg.out, [&](std::ostream& out) { mirkit::write_fasta({genome}, out); });
    std::string manifest = cfg.manifest.empty() ? cfg.out + ".manifest.tsv" : cfg.manifest;
    write_file(manifest, [&](std::ostream& out) { mirkit::write_plant_manifest(recipe, out); });
    if (with_json) {
        json doc{{"genome", recipe.id},
                 {"length", recipe.length},
                 {"seed", recipe.seed},
                 {"plants", json::array()}};
        for (const auto& p : recipe.plants)
            doc["plants"].push_back({{"id", p.id},
                                     {"start", p.offset},
                                     {"end", p.offset + p.sequence.size() - 1},
                                     {"strand", std::string(mirkit::to_string(p.strand))},
                                     {"mutations", p.mutations}});
        write_json_file(manifest + ".json", doc);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// search

struct SearchConfig {
    std::string queries;
    std::string annotations;
    std::string subject;
    std::string out_dir;
    std::string strands = "both";
    mirkit::SearchParams params;
};

int run_search(SearchConfig& cfg, bool with_json) {
    if (cfg.strands == "both") {
        cfg.params.forward = cfg.params.reverse = true;
    } else if (cfg.strands == "forward") {
        cfg.params.forward = true;
        cfg.params.reverse = false;
    } else if (cfg.strands == "reverse") {
        cfg.params.forward = false;
        cfg.params.reverse = true;
    } else {
        throw mirkit::make_error(mirkit::Errc::invalid_argument,
                                 "--strands must be both, forward or reverse");
    }

    auto corpus = load_corpus(cfg.queries, cfg.annotations, mirkit::SeqKind::Precursor);
    if (corpus.empty()) throw mirkit::make_error(mirkit::Errc::empty_input, "no queries");
    auto subjects = mirkit::parse_fasta_file(cfg.subject, mirkit::SeqKind::Genome);
    if (subjects.empty()) throw mirkit::make_error(mirkit::Errc::empty_input, "no subject sequences");

    fs::path dir(cfg.out_dir);
    std::vector<mirkit::SearchResult> results;
    results.reserve(subjects.size());
    for (const auto& subject : subjects)
        results.push_back(mirkit::search(corpus, subject, cfg.params));

    write_file(dir / "hits.tsv", [&](std::ostream& out) {
        for (const auto& res : results) mirkit::write_hit_report(res, cfg.params, out);
    });
    write_file(dir / "tally.tsv", [&](std::ostream& out) {
        out << "# mirkit search tally\n";
        out << "# exact\tone_mismatch\ttwo_mismatch\tnot_significant\n";
        for (const auto& res : results) {
            if (results.size() > 1) out << "# subject=" << res.subject_id << '\n';
            mirkit::write_tally(res, out, false);
        }
    });

    if (with_json) {
        json hits = json::array();
        for (const auto& res : results) {
            for (const auto& qr : res.queries) {
                json entry{{"query_id", qr.query_id},
                           {"subject_id", res.subject_id},
                           {"class", std::string(mirkit::to_string(qr.match_class))}};
                if (qr.best) {
                    entry["strand"] = std::string(mirkit::to_string(qr.best->strand));
                    entry["q_start"] = qr.best->q_start;
                    entry["q_end"] = qr.best->q_end;
                    entry["s_start"] = qr.best->alignment.b_start;
                    entry["s_end"] = qr.best->alignment.b_end;
                    entry["score"] = qr.best->alignment.score;
                    entry["evalue"] = qr.best->evalue;
                    entry["mismatches"] = qr.best->alignment.mismatches;
                    entry["gaps"] = qr.best->alignment.gap_columns;
                }
                hits.push_back(std::move(entry));
            }
        }
        write_json_file(dir / "hits.json", hits);
        json tallies = json::array();
        for (const auto& res : results)
            tallies.push_back({{"subject_id", res.subject_id},
                               {"exact", res.tally.exact},
                               {"one_mismatch", res.tally.one_mismatch},
                               {"two_mismatch", res.tally.two_mismatch},
                               {"not_significant", res.tally.not_significant}});
        write_json_file(dir / "tally.json", tallies);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// msa

struct MsaConfig {
    std::string input;
    std::string out_dir;
    std::size_t min_cluster = 8;
    std::size_t max_cluster = 27;
    unsigned threads = 1;
    mirkit::ScoringScheme scheme;
};

int run_msa(const MsaConfig& cfg, bool with_json) {
    auto records = mirkit::parse_fasta_file(cfg.input, mirkit::SeqKind::Precursor);
    if (records.size() < 2)
        throw mirkit::make_error(mirkit::Errc::empty_input, "msa requires at least 2 sequences");

    auto dm = mirkit::distance_matrix(records, cfg.scheme, cfg.threads);
    auto tree = mirkit::build_guide_tree(dm);
    auto msa = mirkit::progressive_msa(records, tree, cfg.scheme);
    auto clusters = mirkit::extract_clusters(tree, cfg.min_cluster, cfg.max_cluster);

    fs::path dir(cfg.out_dir);
    write_file(dir / "alignment.fa", [&](std::ostream& out) { mirkit::write_msa_fasta(msa, out); });
    write_file(dir / "alignment.aln",
               [&](std::ostream& out) { mirkit::write_msa_clustal(msa, out); });
    write_file(dir / "tree.nwk",
               [&](std::ostream& out) { out << tree.to_newick() << '\n'; });
    write_file(dir / "clusters.tsv",
               [&](std::ostream& out) { mirkit::write_cluster_report(clusters, out); });

    if (with_json) {
        json doc{{"ids", msa.ids}, {"rows", msa.rows}, {"newick", tree.to_newick()}};
        json cl = json::array();
        for (std::size_t i = 0; i < clusters.size(); ++i)
            cl.push_back({{"cluster_index", i + 1},
                          {"size", clusters[i].size()},
                          {"undersized", clusters[i].undersized},
                          {"ids", clusters[i].ids}});
        doc["clusters"] = cl;
        write_json_file(dir / "alignment.json", doc);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// conserve

struct ConserveConfig {
    std::string input;
    std::string annotations;
    std::string msa_path;  // aligned FASTA; empty = align implicitly
    std::string out_dir;
    std::string family;
    double tau = mirkit::kDefaultTau;
    std::size_t lmin = mirkit::kDefaultMinBlockLength;
    unsigned threads = 1;
    mirkit::ScoringScheme scheme;
};

int run_conserve(const ConserveConfig& cfg, bool with_json) {
    auto corpus = load_corpus(cfg.input, cfg.annotations, mirkit::SeqKind::Precursor);
    if (corpus.annotations().empty())
        throw mirkit::make_error(mirkit::Errc::empty_input, "no annotations resolve");

    std::string family = cfg.family;
    if (family.empty()) family = fs::path(cfg.input).stem().string();

    fs::path dir(cfg.out_dir);
    mirkit::Msa msa;
    if (!cfg.msa_path.empty()) {
        msa = mirkit::read_msa_fasta_file(cfg.msa_path);
    } else {
        if (corpus.size() < 2)
            throw mirkit::make_error(mirkit::Errc::empty_input, "msa requires at least 2 sequences");
        auto dm = mirkit::distance_matrix(corpus.records(), cfg.scheme, cfg.threads);
        auto tree = mirkit::build_guide_tree(dm);
        msa = mirkit::progressive_msa(corpus.records(), tree, cfg.scheme);
        write_file(dir / "alignment.fa",
                   [&](std::ostream& out) { mirkit::write_msa_fasta(msa, out); });
        write_file(dir / "tree.nwk", [&](std::ostream& out) { out << tree.to_newick() << '\n'; });
    }

    auto profile = mirkit::conservation_profile(msa);
    auto blocks = mirkit::conserved_blocks(msa, profile, cfg.tau, cfg.lmin);

    std::vector<mirkit::MatureLocalization> localizations;
    for (const auto& ann : corpus.annotations())
        localizations.push_back(mirkit::localize_mature(msa, blocks, ann));
    if (localizations.empty())
        throw mirkit::make_error(mirkit::Errc::empty_input, "no annotations resolve");

    auto stats = mirkit::conservation_stats(localizations);
    auto anomaly = mirkit::detect_multi_region(family, blocks, localizations);

    write_file(dir / "blocks.tsv",
               [&](std::ostream& out) { mirkit::write_block_report(family, blocks, out); });
    write_file(dir / "localizations.tsv",
               [&](std::ostream& out) { mirkit::write_localizations(family, localizations, out); });
    write_file(dir / "stats.tsv", [&](std::ostream& out) { mirkit::write_stats(stats, out); });
    write_file(dir / "anomalies.tsv",
               [&](std::ostream& out) { mirkit::write_anomalies(anomaly, out); });

    if (with_json) {
        json doc{{"family", family},
                 {"tau", cfg.tau},
                 {"lmin", cfg.lmin},
                 {"blocks", json::array()},
                 {"localizations", json::array()},
                 {"stats",
                  {{"inside_pct", stats.pct_inside},
                   {"near_pct", stats.pct_near},
                   {"outside_pct", stats.pct_outside},
                   {"n", stats.n}}}};
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            json jb{{"block_index", b + 1},
                    {"msa_start", blocks[b].start_col},
                    {"msa_end", blocks[b].end_col},
                    {"length", blocks[b].length()},
                    {"mean_score", blocks[b].mean_score},
                    {"rows", json::array()}};
            for (const auto& row : blocks[b].rows)
                jb["rows"].push_back({{"id", row.id},
                                      {"seq_start", row.seq_start},
                                      {"seq_end", row.seq_end},
                                      {"subsequence", row.subsequence}});
            doc["blocks"].push_back(std::move(jb));
        }
        for (const auto& loc : localizations)
            doc["localizations"].push_back(
                {{"mature_id", loc.mature_id},
                 {"relation", std::string(mirkit::to_string(loc.relation))},
                 {"block_index", loc.block_index},
                 {"offset", loc.offset}});
        if (anomaly) {
            json ja{{"family", anomaly->family},
                    {"block_count", anomaly->block_count},
                    {"blocks", json::array()}};
            for (const auto& occ : anomaly->blocks)
                ja["blocks"].push_back(
                    {{"block_index", occ.block_index}, {"mature_ids", occ.mature_ids}});
            doc["anomaly"] = std::move(ja);
        }
        write_json_file(dir / "conserve.json", doc);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// intersect

struct IntersectConfig {
    std::string matures;
    std::string species_csv;
    std::size_t tolerance = 0;
    std::string out_dir;
};

int run_intersect(const IntersectConfig& cfg, bool with_json) {
    auto corpus = load_corpus(cfg.matures, "", mirkit::SeqKind::Mature);
    auto species = mirkit::split(cfg.species_csv, ',');
    auto report = mirkit::venn(corpus, species, cfg.tolerance);

    fs::path dir(cfg.out_dir);
    write_file(dir / "matrix.tsv", [&](std::ostream& out) { mirkit::write_matrix(report, out); });
    write_file(dir / "venn.tsv", [&](std::ostream& out) { mirkit::write_venn(report, out); });

    if (with_json) {
        json doc{{"species", report.species},
                 {"tolerance", report.tolerance},
                 {"union_size", report.union_size},
                 {"regions", json::array()},
                 {"pairwise", report.pairwise}};
        for (const auto& [mask, count] : report.region_counts) {
            std::string label;
            for (std::size_t s = 0; s < report.species.size(); ++s)
                if (mask & (1u << s)) {
                    if (!label.empty()) label += '+';
                    label += report.species[s];
                }
            doc["regions"].push_back({{"subset", label}, {"count", count}});
        }
        write_json_file(dir / "intersect.json", doc);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mirkit - miRNA homology search and conservation analysis"};
    app.require_subcommand(1);
    bool with_json = false;
    app.add_flag("--json", with_json, "Also write machine-readable JSON reports");

    GenConfig gen_cfg;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic genome with planted sequences");
    gen->add_option("--out", gen_cfg.out, "Output genome FASTA")->required();
    gen->add_option("--manifest", gen_cfg.manifest, "Plant manifest TSV (default <out>.manifest.tsv)");
    gen->add_option("--seed", gen_cfg.recipe.seed, "RNG seed (default 42)");
    gen->add_option("--length", gen_cfg.recipe.length, "Genome length in nt")->required();
    gen->add_option("--id", gen_cfg.recipe.id, "Genome record id");
    gen->add_option("--species", gen_cfg.recipe.species, "Genome species code");
    gen->add_option("--plant-fasta", gen_cfg.plant_fasta, "FASTA with plantable sequences");
    gen->add_option("--plant", gen_cfg.plant_specs,
                    "Plant spec id:offset[:strand[:mutations]] (repeatable)");

    SearchConfig search_cfg;
    auto* se = app.add_subcommand("search", "Seed-and-extend homology search");
    se->add_option("--queries", search_cfg.queries, "Query precursor FASTA")->required();
    se->add_option("--annotations", search_cfg.annotations, "Mature annotation TSV")->required();
    se->add_option("--subject", search_cfg.subject, "Subject FASTA (genome)")->required();
    se->add_option("--out", search_cfg.out_dir, "Output directory")->required();
    se->add_option("--word-size", search_cfg.params.word_size, "Seed word size (default 7)");
    se->add_option("--e-cutoff", search_cfg.params.e_cutoff, "E-value cutoff (default 10)");
    se->add_option("--x-drop", search_cfg.params.x_drop, "X-drop for ungapped extension (default 20)");
    se->add_option("--strands", search_cfg.strands, "both | forward | reverse (default both)");
    se->add_option("--k", search_cfg.params.k, "Karlin-Altschul K (default 0.1)");
    se->add_flag("--gapped-rescore", search_cfg.params.gapped_rescore,
                 "Rescore surviving hits with gapped local alignment");
    se->add_option("--threads", search_cfg.params.threads, "Worker threads (default 1)");
    scheme_options(se, search_cfg.params.scheme);

    MsaConfig msa_cfg;
    auto* ms = app.add_subcommand("msa", "Progressive multiple alignment with guide-tree clusters");
    ms->add_option("--input", msa_cfg.input, "Input FASTA")->required();
    ms->add_option("--out", msa_cfg.out_dir, "Output directory")->required();
    ms->add_option("--min-cluster", msa_cfg.min_cluster, "Minimum cluster size (default 8)");
    ms->add_option("--max-cluster", msa_cfg.max_cluster, "Maximum cluster size (default 27)");
    ms->add_option("--threads", msa_cfg.threads, "Worker threads (default 1)");
    scheme_options(ms, msa_cfg.scheme);

    ConserveConfig con_cfg;
    auto* co = app.add_subcommand("conserve", "Conserved blocks and mature localization");
    co->add_option("--input", con_cfg.input, "Precursor FASTA")->required();
    co->add_option("--annotations", con_cfg.annotations, "Mature annotation TSV")->required();
    co->add_option("--msa", con_cfg.msa_path, "Precomputed aligned FASTA (skips implicit alignment)");
    co->add_option("--out", con_cfg.out_dir, "Output directory")->required();
    co->add_option("--family", con_cfg.family, "Family label (default input stem)");
    co->add_option("--tau", con_cfg.tau, "Conservation threshold (default 0.9)");
    co->add_option("--lmin", con_cfg.lmin, "Minimum block length (default 15)");
    co->add_option("--threads", con_cfg.threads, "Worker threads (default 1)");
    scheme_options(co, con_cfg.scheme);

    IntersectConfig int_cfg;
    auto* in = app.add_subcommand("intersect", "Shared mature sequences across species");
    in->add_option("--matures", int_cfg.matures, "Mature FASTA (species from id prefixes)")
        ->required();
    in->add_option("--species", int_cfg.species_csv, "Comma-joined species codes (2-4)")->required();
    in->add_option("--tolerance", int_cfg.tolerance, "Hamming tolerance for matching (default 0)");
    in->add_option("--out", int_cfg.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return run_gen(gen_cfg, with_json);
        if (se->parsed()) return run_search(search_cfg, with_json);
        if (ms->parsed()) return run_msa(msa_cfg, with_json);
        if (co->parsed()) return run_conserve(con_cfg, with_json);
        if (in->parsed()) return run_intersect(int_cfg, with_json);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const mirkit::Error& e) {
        std::cerr << "mirkit: " << e.what() << '\n';
        return e.code() == mirkit::Errc::io_failure ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "mirkit: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
