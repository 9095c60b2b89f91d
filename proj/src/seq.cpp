#include "mirkit/seq.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mirkit {

namespace {

constexpr std::array<bool, 256> make_residue_table() {
    std::array<bool, 256> t{};
    for (char c : {'A', 'C', 'G', 'U', 'N'}) t[static_cast<unsigned char>(c)] = true;
    return t;
}
constexpr auto kIsResidue = make_residue_table();

}  // namespace

bool is_residue(char c) { return kIsResidue[static_cast<unsigned char>(c)]; }

std::string normalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        unsigned char u = static_cast<unsigned char>(ch);
        if (std::isspace(u) || std::isdigit(u)) continue;
        char c = static_cast<char>(std::toupper(u));
        if (c == 'T') c = 'U';
        if (!is_residue(c)) {
            throw make_error(Errc::invalid_residue,
                             "invalid residue '" + std::string(1, ch) + "' at position " +
                                 std::to_string(out.size() + 1),
                             out.size() + 1, ch);
        }
        out.push_back(c);
    }
    if (out.empty()) throw make_error(Errc::empty_sequence, "sequence empty after normalization");
    if (out.size() > kMaxRecordLength)
        throw make_error(Errc::record_too_long, "sequence exceeds 2^31-1 residues");
    return out;
}

NucleotideString NucleotideString::from_raw(std::string_view raw) {
    return from_validated(normalize(raw));
}

NucleotideString NucleotideString::from_validated(std::string s) {
    NucleotideString n;
    n.s_ = std::move(s);
    return n;
}

std::string reverse_complement(std::string_view s) {
    std::string out(s.size(), 'N');
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[s.size() - 1 - i];
        switch (c) {
            case 'A': out[i] = 'U'; break;
            case 'C': out[i] = 'G'; break;
            case 'G': out[i] = 'C'; break;
            case 'U': out[i] = 'A'; break;
            default: out[i] = 'N'; break;
        }
    }
    return out;
}

std::string_view to_string(SeqKind kind) {
    switch (kind) {
        case SeqKind::Precursor: return "precursor";
        case SeqKind::Mature: return "mature";
        case SeqKind::Genome: return "genome";
    }
    return "unknown";
}

std::string species_from_id(std::string_view id) {
    auto dash = id.find('-');
    if (dash == std::string_view::npos || dash == 0) return std::string(id);
    return std::string(id.substr(0, dash));
}

namespace {

// Strips one trailing '\r' so CRLF input parses like LF input.
void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<SeqRecord> parse_fasta(std::istream& in, SeqKind kind,
                                   std::string_view species_override) {
    std::vector<SeqRecord> records;
    std::set<std::string, std::less<>> seen;

    std::string line;
    bool in_record = false;
    std::string id, description, body;

    auto flush = [&]() {
        if (!in_record) return;
        if (body.empty())
            throw make_error(Errc::empty_record, "record '" + id + "' has no sequence body", 0, 0, id);
        SeqRecord rec;
        rec.id = id;
        rec.kind = kind;
        rec.description = description;
        rec.species = species_override.empty() ? species_from_id(id) : std::string(species_override);
        try {
            rec.residues = NucleotideString::from_raw(body);
        } catch (Error& e) {
            e.id = id;
            throw;
        }
        records.push_back(std::move(rec));
        body.clear();
    };

    while (std::getline(in, line)) {
        chomp(line);
        if (!line.empty() && line[0] == '>') {
            flush();
            in_record = true;
            std::string header = line.substr(1);
            auto ws = header.find_first_of(" \t");
            id = header.substr(0, ws);
            description.clear();
            if (ws != std::string::npos) {
                auto begin = header.find_first_not_of(" \t", ws);
                if (begin != std::string::npos) description = header.substr(begin);
            }
            if (id.empty())
                throw make_error(Errc::malformed_line, "FASTA header with empty id");
            if (!seen.insert(id).second)
                throw make_error(Errc::duplicate_id, "duplicate record id '" + id + "'", 0, 0, id);
        } else if (in_record) {
            body += line;
        } else if (line.find_first_not_of(" \t") != std::string::npos) {
            throw make_error(Errc::malformed_line, "sequence data before first FASTA header");
        }
    }
    flush();
    return records;
}

std::vector<SeqRecord> parse_fasta_file(const std::string& path, SeqKind kind,
                                        std::string_view species_override) {
    std::ifstream in(path);
    if (!in) throw make_error(Errc::io_failure, "cannot open '" + path + "'");
    return parse_fasta(in, kind, species_override);
}

void write_fasta(const std::vector<SeqRecord>& records, std::ostream& out) {
    for (const auto& rec : records) {
        out << '>' << rec.id;
        if (!rec.description.empty()) out << ' ' << rec.description;
        out << '\n';
        std::string_view s = rec.residues.view();
        for (std::size_t i = 0; i < s.size(); i += 60) out << s.substr(i, 60) << '\n';
    }
}

std::vector<MatureAnnotation> parse_annotations(std::istream& in) {
    std::vector<MatureAnnotation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 4)
            throw make_error(Errc::malformed_line,
                             "line " + std::to_string(line_no) + ": expected 4 tab-separated fields",
                             line_no);
        MatureAnnotation ann;
        ann.precursor_id = fields[0];
        ann.mature_id = fields[1];
        long s = 0, e = 0;
        try {
            s = std::stol(fields[2]);
            e = std::stol(fields[3]);
        } catch (const std::exception&) {
            throw make_error(Errc::malformed_line,
                             "line " + std::to_string(line_no) + ": non-numeric coordinate", line_no);
        }
        if (s <= 0 || e <= 0)
            throw make_error(Errc::nonpositive_coordinate,
                             "line " + std::to_string(line_no) + ": coordinates are 1-based", line_no);
        if (ann.precursor_id.empty() || ann.mature_id.empty())
            throw make_error(Errc::malformed_line,
                             "line " + std::to_string(line_no) + ": empty id field", line_no);
        ann.start = static_cast<std::size_t>(s);
        ann.end = static_cast<std::size_t>(e);
        out.push_back(std::move(ann));
    }
    return out;
}

std::vector<MatureAnnotation> parse_annotations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw make_error(Errc::io_failure, "cannot open '" + path + "'");
    return parse_annotations(in);
}

Corpus Corpus::assemble(std::vector<SeqRecord> records, std::vector<MatureAnnotation> annotations) {
    Corpus c;
    c.records_ = std::move(records);
    c.annotations_ = std::move(annotations);
    for (std::size_t i = 0; i < c.records_.size(); ++i) {
        const auto& rec = c.records_[i];
        if (rec.id.empty()) throw make_error(Errc::malformed_line, "record with empty id");
        if (!c.by_id_.emplace(rec.id, i).second)
            throw make_error(Errc::duplicate_id, "duplicate record id '" + rec.id + "'", 0, 0, rec.id);
        c.by_species_[rec.species].push_back(i);
    }
    for (const auto& ann : c.annotations_) {
        auto it = c.by_id_.find(ann.precursor_id);
        if (it == c.by_id_.end() || c.records_[it->second].kind != SeqKind::Precursor)
            throw make_error(Errc::dangling_annotation,
                             "annotation '" + ann.mature_id + "' references unknown precursor '" +
                                 ann.precursor_id + "'",
                             0, 0, ann.precursor_id);
        const auto& prec = c.records_[it->second];
        if (ann.start > ann.end || ann.end > prec.residues.size())
            throw make_error(Errc::annotation_out_of_range,
                             "annotation '" + ann.mature_id + "' range [" + std::to_string(ann.start) +
                                 "," + std::to_string(ann.end) + "] exceeds precursor length " +
                                 std::to_string(prec.residues.size()),
                             0, 0, ann.mature_id);
        if (ann.length() < kMatureLengthMin || ann.length() > kMatureLengthMax)
            throw make_error(Errc::annotation_out_of_range,
                             "annotation '" + ann.mature_id + "' length " +
                                 std::to_string(ann.length()) + " outside the mature range [" +
                                 std::to_string(kMatureLengthMin) + "," +
                                 std::to_string(kMatureLengthMax) + "]",
                             0, 0, ann.mature_id);
    }
    return c;
}

const SeqRecord* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

const SeqRecord& Corpus::at(std::string_view id) const {
    const SeqRecord* rec = find(id);
    if (!rec) throw make_error(Errc::invalid_argument, "no record '" + std::string(id) + "'");
    return *rec;
}

std::vector<const MatureAnnotation*> Corpus::annotations_for(std::string_view precursor_id) const {
    std::vector<const MatureAnnotation*> out;
    for (const auto& ann : annotations_)
        if (ann.precursor_id == precursor_id) out.push_back(&ann);
    return out;
}

std::vector<std::string> Corpus::species() const {
    std::vector<std::string> out;
    out.reserve(by_species_.size());
    for (const auto& [code, _] : by_species_) out.push_back(code);
    return out;
}

bool Corpus::has_species(std::string_view code) const {
    return by_species_.find(code) != by_species_.end();
}

std::vector<const SeqRecord*> Corpus::records_of(std::string_view species) const {
    auto it = by_species_.find(species);
    std::vector<const SeqRecord*> out;
    if (it == by_species_.end()) return out;
    out.reserve(it->second.size());
    for (auto idx : it->second) out.push_back(&records_[idx]);
    return out;
}

NucleotideString Corpus::mature_sequence(const MatureAnnotation& ann) const {
    const SeqRecord& prec = at(ann.precursor_id);
    return NucleotideString::from_validated(std::string(prec.residues.slice(ann.start, ann.end)));
}

}  // namespace mirkit
