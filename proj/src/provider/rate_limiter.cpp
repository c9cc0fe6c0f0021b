#include <algorithm>
#include <cmath>

#include "adtracker/provider.hpp"

namespace adtracker::provider {

RateLimiter::RateLimiter(int max_requests_per_minute, Clock& clock)
    : capacity_(max_requests_per_minute), clock_(clock) {
  if (capacity_ < 1) throw Error(ErrorCode::BadRequest, "max_requests_per_minute must be positive");
}

RateLimiter::Permit RateLimiter::acquire_permit() {
  std::unique_lock lock(mutex_);
  for (;;) {
    const Instant now = clock_.now();
    while (!granted_.empty() && now - granted_.front() >= kWindow) granted_.pop_front();
    if (granted_.size() < static_cast<std::size_t>(capacity_)) {
      granted_.push_back(now);
      return Permit{now};
    }
    const Instant wake = granted_.front() + kWindow;
    lock.unlock();
    clock_.sleep_until(wake);
    lock.lock();
  }
}

std::chrono::milliseconds backoff_delay(const BackoffPolicy& policy, int attempt, std::mt19937_64& rng) {
  double raw = static_cast<double>(policy.base.count()) * std::pow(policy.factor, std::max(0, attempt));
  double capped = std::min(raw, static_cast<double>(policy.cap.count()));
  double half = capped / 2.0;
  std::uniform_real_distribution<double> jitter(0.0, half);
  return std::chrono::milliseconds{static_cast<std::int64_t>(half + jitter(rng))};
}

void validate(const ProviderConfig& config) {
  if (config.max_requests_per_minute < 1) {
    throw Error(ErrorCode::BadRequest, "max_requests_per_minute must be positive");
  }
  if (config.page_size < 1 || config.page_size > 250) {
    throw Error(ErrorCode::BadRequest, "page_size must be in [1, 250]");
  }
  if (config.retry_limit < 0) throw Error(ErrorCode::BadRequest, "retry_limit must be non-negative");
}

}  // namespace adtracker::provider
