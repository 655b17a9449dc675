#include "imgstat/error.hpp"

namespace imgstat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::AllImagesFailed: return "AllImagesFailed";
    case ErrorCode::ZeroMeanImage: return "ZeroMeanImage";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::BadEdges: return "BadEdges";
    case ErrorCode::MismatchedEdges: return "MismatchedEdges";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::BadSigma: return "BadSigma";
    case ErrorCode::ImageSmallerThanKernel: return "ImageSmallerThanKernel";
    case ErrorCode::NoPositiveSamples: return "NoPositiveSamples";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadSide: return "BadSide";
    case ErrorCode::InsufficientSupport: return "InsufficientSupport";
    case ErrorCode::NonSquareImage: return "NonSquareImage";
    case ErrorCode::BaseFreqOffGrid: return "BaseFreqOffGrid";
    case ErrorCode::PeriodExceedsImage: return "PeriodExceedsImage";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DecodeError:
    case ErrorCode::TooSmall:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::AllImagesFailed:
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
      return 2;
    case ErrorCode::BadSigma:
    case ErrorCode::BadSide:
    case ErrorCode::BadEdges:
    case ErrorCode::BaseFreqOffGrid:
    case ErrorCode::PeriodExceedsImage:
    case ErrorCode::BadConfig:
    case ErrorCode::ConfigMismatch:
      return 3;
    default:
      return 4;
  }
}

}  // namespace imgstat
