#ifndef PERMUTA_ERRORS_HPP
#define PERMUTA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace permuta {

enum class ErrorKind {
  Precondition,
  TorusTooSmall,
  InvalidFamily,
  NotRangeClosed,
  NotSymmetric,
  NoCover,
  BadInitial,
  TooLarge,
  SectorReducible,
  Parse,
  InvariantViolation,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::TorusTooSmall: return "TorusTooSmall";
    case ErrorKind::InvalidFamily: return "InvalidFamily";
    case ErrorKind::NotRangeClosed: return "NotRangeClosed";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NoCover: return "NoCover";
    case ErrorKind::BadInitial: return "BadInitial";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::SectorReducible: return "SectorReducible";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace permuta

#endif  // PERMUTA_ERRORS_HPP
