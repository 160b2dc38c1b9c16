#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitpipe {

enum class ErrorCode {
  // ingestion
  EmptyFile,
  MalformedRow,
  NonMonotoneTimestamp,
  IrregularSampling,
  NegativeSpeed,
  MissingFile,
  InvalidManifest,
  // dsp
  SignalTooShort,
  InvalidOverlap,
  InvalidCutoff,
  EvenTapCount,
  // alignment / imaging
  EmptyWindow,
  DegenerateGravity,
  WindowTooShort,
  EmptyDataset,
  ConstantColumn,
  TooFewImages,
  CorruptImageStore,
  // neural net
  ShapeMismatch,
  BatchTooSmall,
  InputTooSmall,
  Divergence,
  CorruptModelFile,
  // synthesis / pipeline
  InvalidParams,
  InsufficientImages,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (the CLI in
// particular) can classify it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& message() const noexcept { return message_; }
  // 1-based data row for ingestion errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> line_;
};

}  // namespace gaitpipe
