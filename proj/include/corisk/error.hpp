// Error taxonomy shared by every corisk module.
#pragma once

#include <stdexcept>
#include <string>

namespace corisk {

enum class ErrorKind {
  Schema,       // malformed schema / config, missing declared columns
  Parse,        // unparseable file content
  Input,        // invalid argument values (labels, counts, ranges)
  Size,         // not enough rows / groups / negatives for the operation
  Degenerate,   // degenerate data (single-class labels, zero range, empty margin)
  Calibration,  // too few usable calibration groups
  Pipeline,     // stage-level failure (empty final determinant set, ...)
  Io            // filesystem failures
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Input: return "input";
    case ErrorKind::Size: return "size";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Calibration: return "calibration";
    case ErrorKind::Pipeline: return "pipeline";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace corisk
