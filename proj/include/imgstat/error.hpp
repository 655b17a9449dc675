#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace imgstat {

enum class ErrorCode {
  DecodeError,
  TooSmall,
  EmptyCorpus,
  AllImagesFailed,
  ZeroMeanImage,
  DegenerateSample,
  BadEdges,
  MismatchedEdges,
  EmptyList,
  BadSigma,
  ImageSmallerThanKernel,
  NoPositiveSamples,
  NoConvergence,
  BadSide,
  InsufficientSupport,
  NonSquareImage,
  BaseFreqOffGrid,
  PeriodExceedsImage,
  BadConfig,
  ConfigMismatch,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Exit-code category used by the CLI: 2 input, 3 config, 4 internal.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace imgstat
