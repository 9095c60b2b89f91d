#include "mirkit/genome.hpp"

#include <algorithm>
#include <ostream>
#include <random>

namespace mirkit {

namespace {

char mutate_residue(char c) {
    switch (c) {
        case 'A': return 'C';
        case 'C': return 'G';
        case 'G': return 'U';
        case 'U': return 'A';
        default: return 'A';
    }
}

}  // namespace

SeqRecord generate_genome(const GenomeRecipe& recipe) {
    if (recipe.length == 0)
        throw make_error(Errc::invalid_argument, "genome length must be positive");
    if (recipe.length > kMaxRecordLength)
        throw make_error(Errc::record_too_long, "genome length exceeds 2^31-1");

    // Overlap check over the plant intervals.
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& plant : recipe.plants) {
        if (plant.offset == 0 || plant.sequence.empty() ||
            plant.offset + plant.sequence.size() - 1 > recipe.length)
            throw make_error(Errc::invalid_argument,
                             "plant '" + plant.id + "' does not fit the genome", 0, 0, plant.id);
        for (auto pos : plant.mutations)
            if (pos == 0 || pos > plant.sequence.size())
                throw make_error(Errc::invalid_argument,
                                 "plant '" + plant.id + "' mutation position out of range", pos, 0,
                                 plant.id);
        spans.emplace_back(plant.offset, plant.offset + plant.sequence.size() - 1);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first <= spans[i - 1].second)
            throw make_error(Errc::overlapping_plants, "plants overlap in the genome");

    // mt19937_64's output sequence is pinned by the standard; avoiding
    // std::uniform_int_distribution keeps the bytes identical across
    // implementations.
    std::mt19937_64 rng(recipe.seed);
    std::string genome(recipe.length, 'A');
    for (auto& c : genome) c = kResidueAlphabet[rng() % 4];

    for (const auto& plant : recipe.plants) {
        std::string s = plant.strand == Strand::Forward
                            ? plant.sequence.str()
                            : reverse_complement(plant.sequence.view());
        for (auto pos : plant.mutations) {
            // Mutation positions refer to the planted orientation.
            s[pos - 1] = mutate_residue(s[pos - 1]);
        }
        std::copy(s.begin(), s.end(), genome.begin() + static_cast<std::ptrdiff_t>(plant.offset - 1));
    }

    SeqRecord rec;
    rec.id = recipe.id;
    rec.species = recipe.species;
    rec.kind = SeqKind::Genome;
    rec.residues = NucleotideString::from_validated(std::move(genome));
    rec.description = "synthetic genome seed=" + std::to_string(recipe.seed);
    return rec;
}

void write_plant_manifest(const GenomeRecipe& recipe, std::ostream& out) {
    out << "# mirkit gen manifest\n";
    out << "# genome=" << recipe.id << " length=" << recipe.length << " seed=" << recipe.seed
        << "\n";
    out << "# plant_id\tstart\tend\tstrand\tmutations\n";
    for (const auto& plant : recipe.plants) {
        out << plant.id << '\t' << plant.offset << '\t'
            << (plant.offset + plant.sequence.size() - 1) << '\t' << to_string(plant.strand)
            << '\t';
        if (plant.mutations.empty()) {
            out << '.';
        } else {
            for (std::size_t i = 0; i < plant.mutations.size(); ++i) {
                if (i) out << ',';
                out << plant.mutations[i];
            }
        }
        out << '\n';
    }
}

}  // namespace mirkit
