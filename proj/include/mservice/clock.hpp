#pragma once

#include <atomic>
#include <chrono>

#include "mservice/types.hpp"

namespace mservice {

class Clock {
 public:
  virtual ~Clock() = default;
  [[nodiscard]] virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  [[nodiscard]] Timestamp now() const override {
    return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  }
};

/// Clock driven by the caller. Used by tests and by the scenario runner so
/// transcripts don't depend on wall time.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start) : unix_(to_unix(start)) {}

  [[nodiscard]] Timestamp now() const override { return from_unix(unix_.load()); }

  void set(Timestamp t) { unix_.store(to_unix(t)); }
  void advance(std::chrono::seconds by) { unix_.fetch_add(by.count()); }

 private:
  std::atomic<std::int64_t> unix_;
};

}  // namespace mservice
