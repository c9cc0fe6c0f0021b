#include "adtracker/error.hpp"

namespace adtracker {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRange: return "MalformedRange";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::UnknownAccount: return "UnknownAccount";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::EmailTaken: return "EmailTaken";
    case ErrorCode::WeakPassword: return "WeakPassword";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::AuthFailed: return "AuthFailed";
    case ErrorCode::MalformedPayload: return "MalformedPayload";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::UpstreamRejected: return "UpstreamRejected";
    case ErrorCode::GraphLookupFailed: return "GraphLookupFailed";
    case ErrorCode::DownloadFailed: return "DownloadFailed";
    case ErrorCode::NotAnImage: return "NotAnImage";
    case ErrorCode::StorageFailure: return "StorageFailure";
  }
  return "Unknown";
}

}  // namespace adtracker
