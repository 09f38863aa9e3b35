#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpost {

enum class ErrorCode {
  DegenerateData,
  DegenerateConditioning,
  InsufficientData,
  InvalidParam,
  InvalidLevel,
  InitInvalid,
  EmptyChain,
  NoConvergence,
  NoRoot,
  ParseError,
  UnknownKey,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::DegenerateConditioning: return "DegenerateConditioning";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::InitInvalid: return "InitInvalid";
    case ErrorCode::EmptyChain: return "EmptyChain";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Message construction is deferred to the failure path; this sits in hot loops.
inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) [[unlikely]] throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) [[unlikely]] throw Error(code, what);
}

}  // namespace dpost
