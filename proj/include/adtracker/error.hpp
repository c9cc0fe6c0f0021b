#pragma once

#include <array>
#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adtracker {

// Every failure a module can surface. The api module maps each code to
// exactly one (name, http status) pair.
enum class ErrorCode {
  MalformedRange,
  InvalidSpec,
  InvalidWindow,
  BadRequest,
  Unauthenticated,
  Unauthorized,
  UnknownJob,
  UnknownAccount,
  NotFound,
  EmailTaken,
  WeakPassword,
  InvalidState,
  RateLimited,
  AuthFailed,
  MalformedPayload,
  Transport,
  UpstreamRejected,
  GraphLookupFailed,
  DownloadFailed,
  NotAnImage,
  StorageFailure,
};

inline constexpr std::array kAllErrorCodes = {
    ErrorCode::MalformedRange,    ErrorCode::InvalidSpec,
    ErrorCode::InvalidWindow,     ErrorCode::BadRequest,
    ErrorCode::Unauthenticated,   ErrorCode::Unauthorized,
    ErrorCode::UnknownJob,        ErrorCode::UnknownAccount,
    ErrorCode::NotFound,          ErrorCode::EmailTaken,
    ErrorCode::WeakPassword,      ErrorCode::InvalidState,
    ErrorCode::RateLimited,       ErrorCode::AuthFailed,
    ErrorCode::MalformedPayload,  ErrorCode::Transport,
    ErrorCode::UpstreamRejected,  ErrorCode::GraphLookupFailed,
    ErrorCode::DownloadFailed,    ErrorCode::NotAnImage,
    ErrorCode::StorageFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

// Whether a caller may retry the failed operation unchanged.
constexpr bool is_retryable(ErrorCode code) noexcept {
  return code == ErrorCode::RateLimited || code == ErrorCode::Transport ||
         code == ErrorCode::DownloadFailed;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& message, std::chrono::milliseconds wait_hint)
      : Error(ErrorCode::RateLimited, message), wait_hint_(wait_hint) {}

  [[nodiscard]] std::chrono::milliseconds wait_hint() const noexcept { return wait_hint_; }

 private:
  std::chrono::milliseconds wait_hint_;
};

}  // namespace adtracker
