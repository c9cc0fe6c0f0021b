#pragma once

#include <chrono>
#include <mutex>

namespace adtracker {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

// Source of wall-clock time. Everything that waits (rate limiter, retry
// backoff, poll-cycle suspension) goes through a Clock so tests can run on a
// manual one.
class Clock {
 public:
  virtual ~Clock() = default;
  [[nodiscard]] virtual Instant now() const = 0;
  virtual void sleep_until(Instant deadline) = 0;

  void sleep_for(std::chrono::milliseconds d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  [[nodiscard]] Instant now() const override;
  void sleep_until(Instant deadline) override;
};

// Time only moves when told to. sleep_until jumps straight to the deadline.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Instant start = Instant{}) : now_(start) {}

  [[nodiscard]] Instant now() const override;
  void sleep_until(Instant deadline) override;

  void set(Instant t);
  void advance(std::chrono::milliseconds d);

 private:
  mutable std::mutex mutex_;
  Instant now_;
};

}  // namespace adtracker
