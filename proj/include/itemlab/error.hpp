#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace itemlab {

enum class ErrorCode {
  // dataset ingest
  MalformedRecord,
  DuplicateId,
  DuplicateResponse,
  EmptyResponseSet,
  UnknownItem,
  // item statistics
  NoRespondents,
  TooFewRespondents,
  NoDistractorData,
  // pair construction
  UnknownDimension,
  EmptyCandidateSet,
  MissingTopicAnnotations,
  InvertUnsupported,
  // provider gateway
  Timeout,
  RateLimited,
  AuthFailure,
  MalformedProviderResponse,
  ScriptExhausted,
  UnmatchedRequest,
  // prompting and response parsing
  UnboundPlaceholder,
  AmbiguousVerdict,
  TooFewProfiles,
  ParseFailure,
  // analysis
  UnknownPairReference,
  MismatchedPairSets,
  NotComputable,
  InvalidParameters,
  DegenerateGroups,
  // plumbing
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Warnings (excluded candidates, ignored fields, ...) go to a process-wide
// sink; defaults to stderr. Tests install their own sink to capture them.
void set_warning_sink(std::function<void(const std::string&)> sink);
void warn(const std::string& message);

}  // namespace itemlab
