#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mirkit {

enum class Errc {
    invalid_residue,
    empty_sequence,
    empty_record,
    duplicate_id,
    malformed_line,
    nonpositive_coordinate,
    dangling_annotation,
    annotation_out_of_range,
    unknown_species,
    subject_too_short,
    nonnegative_expected_score,
    empty_alignment,
    empty_input,
    record_too_long,
    overlapping_plants,
    invalid_argument,
    io_failure,
};

/// Library-wide exception. `code()` identifies the failure class so callers
/// (and the CLI exit-code mapping) can react without parsing messages.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message) : std::runtime_error(std::move(message)), code_(code) {}

    Errc code() const noexcept { return code_; }

    // Optional context, filled where meaningful.
    std::size_t position = 0;  // 1-based residue position or line number
    char symbol = 0;
    std::string id;

private:
    Errc code_;
};

inline Error make_error(Errc code, std::string message, std::size_t position = 0, char symbol = 0,
                        std::string id = {}) {
    Error e(code, std::move(message));
    e.position = position;
    e.symbol = symbol;
    e.id = std::move(id);
    return e;
}

}  // namespace mirkit
