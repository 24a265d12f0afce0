#pragma once

#include <chrono>
#include <cstdint>

namespace edgebench {

using TimeMs = std::int64_t;  // milliseconds since Unix epoch (or virtual epoch)

class Clock {
public:
  virtual ~Clock() = default;
  virtual TimeMs now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
  TimeMs now_ms() const override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }
};

// Manually advanced clock backing simulated-time runs and unit tests.
class ManualClock final : public Clock {
public:
  explicit ManualClock(TimeMs start = 0) : now_(start) {}
  TimeMs now_ms() const override { return now_; }
  void set(TimeMs t) { now_ = t; }
  void advance(TimeMs dt) { now_ += dt; }

private:
  TimeMs now_;
};

// Virtual epoch used by simulated-time runs so timestamps look like wall-clock ms.
inline constexpr TimeMs kSimEpochMs = 1700000000000;

}  // namespace edgebench
