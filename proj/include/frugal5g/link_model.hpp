#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "frugal5g/engine.hpp"

namespace f5g {

struct LinkParams {
  std::uint64_t capacity_bps = 1'000'000;
  SimTime latency = ms(5);
};

// FIFO capacity/latency link. A PDU arriving at `now` starts serializing when
// the link frees up and is delivered base latency after its last bit leaves:
//
//   delivery = max(now, busy_until) + ceil(bits / capacity) + latency
//
// At most `queue_cap` PDUs may be waiting or serializing; admission beyond
// that drops the newest PDU.
class LinkModel {
 public:
  static constexpr std::size_t kDefaultQueueCap = 256;

  explicit LinkModel(LinkParams params, std::size_t queue_cap = kDefaultQueueCap);

  // Delivery time, or nullopt when the queue is full.
  std::optional<SimTime> admit(SimTime now, std::size_t bytes);

  std::size_t backlog(SimTime now);
  SimTime serialization_time(std::size_t bytes) const;
  const LinkParams& params() const { return params_; }

 private:
  LinkParams params_;
  std::size_t queue_cap_;
  SimTime busy_until_ = 0;
  std::deque<SimTime> finish_times_;
};

}  // namespace f5g
