#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexiscreen {

enum class ErrorCode {
  // corpus
  Io,
  NotWav,
  UnsupportedEncoding,
  WrongChannelCount,
  WrongSampleRate,
  UnknownLabel,
  WordCountMismatch,
  MissingSubstitutionText,
  EmptyIntervals,
  Overlap,
  Unsorted,
  Gap,
  OutOfRange,
  EmptyWord,
  // dsp / features
  TooShort,
  IntervalCountMismatch,
  SchemaMismatch,
  // lexical
  EmptyTranscription,
  TooFewPoints,
  SingleCluster,
  AmbiguousLabeling,
  // classify
  SingleClassTraining,
  DimensionMismatch,
  TooFewPerClass,
  EmptyMatrix,
  // asr_align
  EmptyCanonical,
  NoModel,
  // cli
  Config,
  JoinError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::NotWav: return "NotWav";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::WrongChannelCount: return "WrongChannelCount";
    case ErrorCode::WrongSampleRate: return "WrongSampleRate";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::WordCountMismatch: return "WordCountMismatch";
    case ErrorCode::MissingSubstitutionText: return "MissingSubstitutionText";
    case ErrorCode::EmptyIntervals: return "EmptyIntervals";
    case ErrorCode::Overlap: return "Overlap";
    case ErrorCode::Unsorted: return "Unsorted";
    case ErrorCode::Gap: return "Gap";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyWord: return "EmptyWord";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::IntervalCountMismatch: return "IntervalCountMismatch";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyTranscription: return "EmptyTranscription";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::AmbiguousLabeling: return "AmbiguousLabeling";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::EmptyCanonical: return "EmptyCanonical";
    case ErrorCode::NoModel: return "NoModel";
    case ErrorCode::Config: return "Config";
    case ErrorCode::JoinError: return "JoinError";
  }
  return "Unknown";
}

/// All library failures are reported as an Error carrying a distinct code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lexiscreen
