#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mirkit/errors.hpp"

namespace mirkit {

inline constexpr std::string_view kResidueAlphabet = "ACGUN";
inline constexpr std::size_t kMaxRecordLength = 2147483647;  // 2^31-1 residues

/// Uppercase RNA string over {A,C,G,U,N}, length >= 1 once constructed.
class NucleotideString {
public:
    NucleotideString() = default;

    /// Normalizes raw text: case-folded, T->U, whitespace and digits stripped.
    /// Throws Errc::invalid_residue (position = 1-based index in the residue
    /// stream after stripping) for any other symbol.
    static NucleotideString from_raw(std::string_view raw);

    /// Adopts a string that is already normalized (internal fast path).
    static NucleotideString from_validated(std::string s);

    const std::string& str() const noexcept { return s_; }
    std::string_view view() const noexcept { return s_; }
    std::size_t size() const noexcept { return s_.size(); }
    bool empty() const noexcept { return s_.empty(); }
    char operator[](std::size_t i) const { return s_[i]; }

    /// 1-based inclusive slice.
    std::string_view slice(std::size_t start, std::size_t end) const {
        return std::string_view(s_).substr(start - 1, end - start + 1);
    }

    bool operator==(const NucleotideString&) const = default;
    auto operator<=>(const NucleotideString&) const = default;

private:
    std::string s_;
};

/// Normalization used by all ingestion paths; idempotent.
std::string normalize(std::string_view raw);

std::string reverse_complement(std::string_view s);

bool is_residue(char c);

enum class SeqKind { Precursor, Mature, Genome };

std::string_view to_string(SeqKind kind);

struct SeqRecord {
    std::string id;
    std::string species;  // 3-letter code, usually the id prefix before '-'
    SeqKind kind = SeqKind::Precursor;
    NucleotideString residues;
    std::string description;
};

/// Mature-miRNA coordinates within a precursor, 1-based inclusive.
struct MatureAnnotation {
    std::string precursor_id;
    std::string mature_id;
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start + 1; }
};

inline constexpr std::size_t kMatureLengthMin = 16;
inline constexpr std::size_t kMatureLengthMax = 30;

/// miRBase-style species code: prefix before the first '-'; the full id when
/// there is no dash.
std::string species_from_id(std::string_view id);

/// FASTA reader. Header token 1 is the id; multi-line bodies are concatenated
/// and normalized. CR/LF and LF are both accepted. `species_override`, when
/// non-empty, replaces the id-derived species code.
std::vector<SeqRecord> parse_fasta(std::istream& in, SeqKind kind,
                                   std::string_view species_override = {});
std::vector<SeqRecord> parse_fasta_file(const std::string& path, SeqKind kind,
                                        std::string_view species_override = {});

void write_fasta(const std::vector<SeqRecord>& records, std::ostream& out);

/// Annotation sidecar TSV: precursor_id<TAB>mature_id<TAB>start<TAB>end,
/// 1-based inclusive; '#' lines are comments. Range checks against the
/// precursor happen at corpus assembly, not here.
std::vector<MatureAnnotation> parse_annotations(std::istream& in);
std::vector<MatureAnnotation> parse_annotations_file(const std::string& path);

/// Immutable sequence corpus; safe for concurrent read access.
class Corpus {
public:
    Corpus() = default;

    /// Validates record uniqueness and annotation ranges (including the
    /// mature sanity length of 16..30nt) and builds the species index.
    static Corpus assemble(std::vector<SeqRecord> records,
                           std::vector<MatureAnnotation> annotations);

    const std::vector<SeqRecord>& records() const noexcept { return records_; }
    const std::vector<MatureAnnotation>& annotations() const noexcept { return annotations_; }

    const SeqRecord* find(std::string_view id) const;
    const SeqRecord& at(std::string_view id) const;

    std::vector<const MatureAnnotation*> annotations_for(std::string_view precursor_id) const;

    /// Sorted unique species codes.
    std::vector<std::string> species() const;
    bool has_species(std::string_view code) const;
    std::vector<const SeqRecord*> records_of(std::string_view species) const;

    /// Extracts the mature subsequence [start,end] from the precursor.
    NucleotideString mature_sequence(const MatureAnnotation& ann) const;

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

private:
    std::vector<SeqRecord> records_;
    std::vector<MatureAnnotation> annotations_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_species_;
};

}  // namespace mirkit
