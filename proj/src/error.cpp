#include "gaitpipe/error.hpp"

namespace gaitpipe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::IrregularSampling: return "IrregularSampling";
    case ErrorCode::NegativeSpeed: return "NegativeSpeed";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::InvalidOverlap: return "InvalidOverlap";
    case ErrorCode::InvalidCutoff: return "InvalidCutoff";
    case ErrorCode::EvenTapCount: return "EvenTapCount";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::DegenerateGravity: return "DegenerateGravity";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::TooFewImages: return "TooFewImages";
    case ErrorCode::CorruptImageStore: return "CorruptImageStore";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::InputTooSmall: return "InputTooSmall";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::CorruptModelFile: return "CorruptModelFile";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InsufficientImages: return "InsufficientImages";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message), line_(line) {}

}  // namespace gaitpipe
