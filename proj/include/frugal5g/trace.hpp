#pragma once

// Line-oriented simulation trace. One record per line:
//
//   t_us <TAB> seq <TAB> node <TAB> kind [<TAB> key=value]...
//
// Field order is the order of emission, so a run renders byte-identically
// every time.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "frugal5g/engine.hpp"

namespace f5g {

enum class TraceKind { Rrc, Mgmt, Data, Mrb, Ctrl, Auth, Sync, Drop, Boundary };

std::string_view trace_kind_name(TraceKind kind);
std::optional<TraceKind> parse_trace_kind(std::string_view name);

using TraceFields = std::vector<std::pair<std::string, std::string>>;

struct TraceRecord {
  SimTime t = 0;
  std::uint64_t seq = 0;
  std::string node;
  TraceKind kind = TraceKind::Ctrl;
  TraceFields fields;

  // Empty string when the key is absent.
  std::string get(std::string_view key) const;
  bool has(std::string_view key) const;
};

class Trace {
 public:
  const TraceRecord& emit(SimTime t, std::string node, TraceKind kind, TraceFields fields);

  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::string render() const;
  std::uint64_t digest() const;

 private:
  std::vector<TraceRecord> records_;
};

std::string render_record(const TraceRecord& rec);
// Throws Error(SchemaError) on a malformed line.
TraceRecord parse_record(std::string_view line);
std::vector<TraceRecord> parse_trace(std::string_view text);

// Keeps records whose node is in `nodes` (all when empty) and whose kind is
// in `kinds` (all when empty), preserving order.
std::vector<TraceRecord> filter_trace(const std::vector<TraceRecord>& records,
                                      const std::set<std::string>& nodes,
                                      const std::set<TraceKind>& kinds);

// 64-bit FNV-1a, used for trace/decision digests. Not cryptographic.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace f5g
