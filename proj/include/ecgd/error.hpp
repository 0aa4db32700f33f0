#ifndef ECGD_ERROR_HPP
#define ECGD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecgd {

enum class ErrorCode {
  io,
  unsupported_format,
  corrupt_stream,
  dimension_mismatch,
  degenerate_histogram,
  no_grid,
  too_few_lines,
  non_square_grid,
  no_curves,
  empty_roi,
  out_of_range,
  empty_image,
  missing_values,
  invalid_argument,
  clipping,
  overlapping_layout,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::unsupported_format: return "unsupported_format";
    case ErrorCode::corrupt_stream: return "corrupt_stream";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::degenerate_histogram: return "degenerate_histogram";
    case ErrorCode::no_grid: return "no_grid";
    case ErrorCode::too_few_lines: return "too_few_lines";
    case ErrorCode::non_square_grid: return "non_square_grid";
    case ErrorCode::no_curves: return "no_curves";
    case ErrorCode::empty_roi: return "empty_roi";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::empty_image: return "empty_image";
    case ErrorCode::missing_values: return "missing_values";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::clipping: return "clipping";
    case ErrorCode::overlapping_layout: return "overlapping_layout";
  }
  return "unknown";
}

/// Every failure in the library is reported as an Error carrying a code the
/// caller can branch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// An Error raised while running a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorCode code, const std::string& what)
      : Error(code, stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ecgd

#endif  // ECGD_ERROR_HPP
