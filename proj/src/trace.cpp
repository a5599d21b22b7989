#include "frugal5g/trace.hpp"

#include <charconv>
#include <cstdio>

#include "frugal5g/error.hpp"

namespace f5g {

namespace {

constexpr std::string_view kKindNames[] = {"rrc",  "mgmt", "data", "mrb",     "ctrl",
                                           "auth", "sync", "drop", "boundary"};

bool clean(std::string_view s) {
  for (char c : s)
    if (c == '\t' || c == '\n' || c == '\r') return false;
  return true;
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    fail(Errc::SchemaError, "trace " + std::string(what) + " '" + std::string(s) + "' is not a number");
  return v;
}

}  // namespace

std::string_view trace_kind_name(TraceKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<TraceKind> parse_trace_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i)
    if (kKindNames[i] == name) return static_cast<TraceKind>(i);
  return std::nullopt;
}

std::string TraceRecord::get(std::string_view key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return v;
  return {};
}

bool TraceRecord::has(std::string_view key) const {
  for (const auto& f : fields)
    if (f.first == key) return true;
  return false;
}

const TraceRecord& Trace::emit(SimTime t, std::string node, TraceKind kind, TraceFields fields) {
  if (!clean(node)) fail(Errc::InvariantViolation, "trace node contains a separator");
  for (const auto& [k, v] : fields)
    if (!clean(k) || !clean(v) || k.find('=') != std::string::npos || k.empty())
      fail(Errc::InvariantViolation, "malformed trace field '" + k + "'");
  TraceRecord rec{t, records_.size(), std::move(node), kind, std::move(fields)};
  records_.push_back(std::move(rec));
  return records_.back();
}

std::string render_record(const TraceRecord& rec) {
  std::string line = std::to_string(rec.t);
  line += '\t';
  line += std::to_string(rec.seq);
  line += '\t';
  line += rec.node;
  line += '\t';
  line += trace_kind_name(rec.kind);
  for (const auto& [k, v] : rec.fields) {
    line += '\t';
    line += k;
    line += '=';
    line += v;
  }
  return line;
}

std::string Trace::render() const {
  std::string out;
  for (const auto& rec : records_) {
    out += render_record(rec);
    out += '\n';
  }
  return out;
}

std::uint64_t Trace::digest() const { return fnv1a(render()); }

TraceRecord parse_record(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (cols.size() < 4) fail(Errc::SchemaError, "trace line has fewer than 4 columns");
  TraceRecord rec;
  rec.t = parse_number<SimTime>(cols[0], "time");
  rec.seq = parse_number<std::uint64_t>(cols[1], "seq");
  rec.node = std::string(cols[2]);
  auto kind = parse_trace_kind(cols[3]);
  if (!kind) fail(Errc::SchemaError, "unknown trace kind '" + std::string(cols[3]) + "'");
  rec.kind = *kind;
  for (std::size_t i = 4; i < cols.size(); ++i) {
    auto eq = cols[i].find('=');
    if (eq == std::string_view::npos || eq == 0)
      fail(Errc::SchemaError, "trace field '" + std::string(cols[i]) + "' is not key=value");
    rec.fields.emplace_back(std::string(cols[i].substr(0, eq)), std::string(cols[i].substr(eq + 1)));
  }
  return rec;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
  std::vector<TraceRecord> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty()) out.push_back(parse_record(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

std::vector<TraceRecord> filter_trace(const std::vector<TraceRecord>& records,
                                      const std::set<std::string>& nodes,
                                      const std::set<TraceKind>& kinds) {
  std::vector<TraceRecord> out;
  for (const auto& rec : records) {
    if (!nodes.empty() && !nodes.count(rec.node)) continue;
    if (!kinds.empty() && !kinds.count(rec.kind)) continue;
    out.push_back(rec);
  }
  return out;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace f5g
