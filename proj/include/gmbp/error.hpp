#ifndef GMBP_ERROR_HPP_
#define GMBP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gmbp {

enum class ErrorKind {
  Io,
  UnsupportedFormat,
  CorruptHeader,
  DimensionMismatch,
  EmptyRegion,
  InvalidArgument,
  TooFewPatches,
  DegeneratePatches,
  InsufficientData,
  MalformedModel,
  VersionMismatch,
  UncoverableMask,
  CyclicGraph,
  Numerical,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "Io";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptHeader: return "CorruptHeader";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TooFewPatches: return "TooFewPatches";
    case ErrorKind::DegeneratePatches: return "DegeneratePatches";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::MalformedModel: return "MalformedModel";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::UncoverableMask: return "UncoverableMask";
    case ErrorKind::CyclicGraph: return "CyclicGraph";
    case ErrorKind::Numerical: return "Numerical";
  }
  return "Unknown";
}

}  // namespace gmbp

#endif  // GMBP_ERROR_HPP_
