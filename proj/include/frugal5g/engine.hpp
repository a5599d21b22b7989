#pragma once

// Discrete-event engine. Events run in (time, seq) order where seq is the
// insertion counter, so a given schedule replays identically.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace f5g {

// Simulated time in integer microseconds.
using SimTime = std::int64_t;

constexpr SimTime us(std::int64_t v) { return v; }
constexpr SimTime ms(std::int64_t v) { return v * 1000; }
constexpr SimTime seconds(std::int64_t v) { return v * 1'000'000; }
SimTime from_ms(double v);  // rounds to the nearest microsecond

class Engine {
 public:
  using Action = std::function<void()>;

  SimTime now() const { return now_; }

  // Throws Error(InvariantViolation) for a time earlier than now().
  std::uint64_t schedule_at(SimTime at, std::string target, Action action);
  std::uint64_t schedule_in(SimTime delay, std::string target, Action action) {
    return schedule_at(now_ + delay, std::move(target), std::move(action));
  }

  // Runs every event with time <= end, then advances the clock to end.
  void run_until(SimTime end);
  // Runs the next event; false once the queue is empty.
  bool step();

  std::size_t pending() const { return heap_.size(); }
  std::uint64_t executed() const { return executed_; }
  // Target node of the event currently executing, for diagnostics.
  const std::string& current_target() const { return current_target_; }

 private:
  struct Event {
    SimTime time;
    std::uint64_t seq;
    std::string target;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  std::string current_target_;
  std::vector<Event> heap_;
};

}  // namespace f5g
