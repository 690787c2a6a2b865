#include "itemlab/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace itemlab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DuplicateResponse: return "DuplicateResponse";
    case ErrorCode::EmptyResponseSet: return "EmptyResponseSet";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::NoRespondents: return "NoRespondents";
    case ErrorCode::TooFewRespondents: return "TooFewRespondents";
    case ErrorCode::NoDistractorData: return "NoDistractorData";
    case ErrorCode::UnknownDimension: return "UnknownDimension";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::MissingTopicAnnotations: return "MissingTopicAnnotations";
    case ErrorCode::InvertUnsupported: return "InvertUnsupported";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::MalformedProviderResponse: return "MalformedProviderResponse";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::UnmatchedRequest: return "UnmatchedRequest";
    case ErrorCode::UnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorCode::AmbiguousVerdict: return "AmbiguousVerdict";
    case ErrorCode::TooFewProfiles: return "TooFewProfiles";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::UnknownPairReference: return "UnknownPairReference";
    case ErrorCode::MismatchedPairSets: return "MismatchedPairSets";
    case ErrorCode::NotComputable: return "NotComputable";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::DegenerateGroups: return "DegenerateGroups";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::mutex g_warn_mutex;
std::function<void(const std::string&)> g_warn_sink;

}  // namespace

void set_warning_sink(std::function<void(const std::string&)> sink) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  g_warn_sink = std::move(sink);
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  if (g_warn_sink) {
    g_warn_sink(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

}  // namespace itemlab
