#include "adtracker/clock.hpp"

#include <thread>

namespace adtracker {

Instant SystemClock::now() const {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

void SystemClock::sleep_until(Instant deadline) {
  auto remaining = deadline - now();
  if (remaining > std::chrono::milliseconds::zero()) std::this_thread::sleep_for(remaining);
}

Instant ManualClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

void ManualClock::sleep_until(Instant deadline) {
  std::lock_guard lock(mutex_);
  if (deadline > now_) now_ = deadline;
}

void ManualClock::set(Instant t) {
  std::lock_guard lock(mutex_);
  now_ = t;
}

void ManualClock::advance(std::chrono::milliseconds d) {
  std::lock_guard lock(mutex_);
  now_ += d;
}

}  // namespace adtracker
