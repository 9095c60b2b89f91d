#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mirkit/search.hpp"
#include "mirkit/seq.hpp"

namespace mirkit {

/// One sequence placed into a synthetic genome. `mutations` are 1-based
/// positions within the planted sequence; each substitutes the residue with
/// the next one in the A->C->G->U->A cycle (N becomes A), so mutated plants
/// stay deterministic.
struct Plant {
    std::string id;
    NucleotideString sequence;
    std::size_t offset = 0;  // 1-based start in the genome
    Strand strand = Strand::Forward;
    std::vector<std::size_t> mutations;
};

struct GenomeRecipe {
    std::string id = "synthetic-genome";
    std::string species = "syn";
    std::uint64_t seed = 42;
    std::size_t length = 0;
    std::vector<Plant> plants;
};

/// Deterministic pseudo-random genome (mt19937_64 driven, so identical bytes
/// for identical recipes on any platform) with the plants applied. Throws
/// Errc::overlapping_plants when plant intervals intersect and
/// Errc::invalid_argument when a plant exceeds the genome bounds.
SeqRecord generate_genome(const GenomeRecipe& recipe);

/// TSV manifest of the applied plants: id, start, end, strand, mutations.
void write_plant_manifest(const GenomeRecipe& recipe, std::ostream& out);

}  // namespace mirkit
