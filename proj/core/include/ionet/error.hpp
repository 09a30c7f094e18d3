#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ionet {

/// Failure categories raised by the library. The CLI maps these onto exit
/// codes, so new kinds need a matching entry there.
enum class ErrorKind {
  kInvalidInput,
  kDegenerate,
  kEmptyInput,
  kInsufficientData,
  kAlignment,
  kOutOfRange,
  kAliasing,
  kUnsupportedRate,
  kModelContract,
  kNumericOverflow,
  kTrainingDiverged,
  kCorruptFile,
  kVersionMismatch,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the training loss becomes non-finite.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : Error(ErrorKind::kTrainingDiverged, what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace ionet
