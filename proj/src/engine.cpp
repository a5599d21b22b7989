#include "frugal5g/engine.hpp"

#include <algorithm>
#include <cmath>

#include "frugal5g/error.hpp"

namespace f5g {

SimTime from_ms(double v) { return static_cast<SimTime>(std::llround(v * 1000.0)); }

std::uint64_t Engine::schedule_at(SimTime at, std::string target, Action action) {
  if (at < now_)
    fail(Errc::InvariantViolation, "event for " + target + " scheduled at " + std::to_string(at) +
                                       " us, before now " + std::to_string(now_) + " us");
  const auto seq = next_seq_++;
  heap_.push_back(Event{at, seq, std::move(target), std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return seq;
}

bool Engine::step() {
  if (heap_.empty()) return false;
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Event ev = std::move(heap_.back());
  heap_.pop_back();
  now_ = ev.time;
  current_target_ = std::move(ev.target);
  ++executed_;
  ev.action();
  return true;
}

void Engine::run_until(SimTime end) {
  while (!heap_.empty() && heap_.front().time <= end) step();
  if (end > now_) now_ = end;
}

}  // namespace f5g
