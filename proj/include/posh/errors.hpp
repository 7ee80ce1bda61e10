#pragma once

#include <stdexcept>
#include <string>

namespace posh {

/// Failure categories raised across the library. Each maps 1:1 onto a
/// documented error condition of some operation.
enum class Errc {
  NoChainFound,
  ChainTooShort,
  MalformedRecord,
  DegenerateGeometry,
  ShapeMismatch,
  BatchTooSmall,
  IndexOutOfRange,
  EmptyInput,
  ZeroVector,
  NonFiniteValue,
  NonFiniteGradient,
  DegeneratePointSet,
  CorrespondenceTooShort,
  WindowOutOfRange,
  SingletonDataset,
  NotEnoughNegatives,
  LengthMismatch,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  ChecksumMismatch,
  EmptyDatabase,
  DegenerateLabels,
  NoPositives,
  UsageError,
  IoError,
  ConfigError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc c, const std::string& msg) {
  throw Error(c, msg);
}

}  // namespace posh
