#include "frugal5g/link_model.hpp"

#include <algorithm>

#include "frugal5g/error.hpp"

namespace f5g {

LinkModel::LinkModel(LinkParams params, std::size_t queue_cap)
    : params_(params), queue_cap_(queue_cap) {
  if (params_.capacity_bps == 0) fail(Errc::InvariantViolation, "link capacity must be > 0");
  if (params_.latency < 0) fail(Errc::InvariantViolation, "link latency must be >= 0");
}

SimTime LinkModel::serialization_time(std::size_t bytes) const {
  const unsigned __int128 bits_us = static_cast<unsigned __int128>(bytes) * 8u * 1'000'000u;
  return static_cast<SimTime>((bits_us + params_.capacity_bps - 1) / params_.capacity_bps);
}

std::size_t LinkModel::backlog(SimTime now) {
  while (!finish_times_.empty() && finish_times_.front() <= now) finish_times_.pop_front();
  return finish_times_.size();
}

std::optional<SimTime> LinkModel::admit(SimTime now, std::size_t bytes) {
  if (backlog(now) >= queue_cap_) return std::nullopt;
  const SimTime start = std::max(now, busy_until_);
  busy_until_ = start + serialization_time(bytes);
  finish_times_.push_back(busy_until_);
  return busy_until_ + params_.latency;
}

}  // namespace f5g
