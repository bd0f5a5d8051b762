#pragma once

#include <stdexcept>
#include <string>

namespace satkit {

enum class Errc {
    invalid_argument,
    invalid_annotation,
    dimension_mismatch,
    behind_camera,
    infeasible,
    degenerate_geometry,
    undefined_metric,
    non_finite,
    parse,
    schema,
    io,
};

// Broad category used by the CLI to pick an exit code.
enum class ErrorCategory { parse, validation, compute, io };

constexpr ErrorCategory category_of(Errc code) {
    switch (code) {
        case Errc::parse:
            return ErrorCategory::parse;
        case Errc::invalid_argument:
        case Errc::invalid_annotation:
        case Errc::dimension_mismatch:
        case Errc::schema:
            return ErrorCategory::validation;
        case Errc::io:
            return ErrorCategory::io;
        default:
            return ErrorCategory::compute;
    }
}

const char* errc_name(Errc code);

class Error : public std::runtime_error {
   public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

   private:
    Errc code_;
};

}  // namespace satkit
