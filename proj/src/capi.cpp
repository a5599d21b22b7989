#include <cstdlib>
#include <cstring>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "frugal5g/analysis.hpp"
#include "frugal5g/error.hpp"
#include "frugal5g/frames.hpp"
#include "frugal5g/frugal5g.h"
#include "frugal5g/scenario.hpp"
#include "frugal5g/simulation.hpp"

struct f5g_scenario {
  f5g::scenario::Scenario value;
};

struct f5g_result {
  std::string trace;
  std::string metrics;
  std::uint64_t digest = 0;
};

namespace {

thread_local std::string last_error;

f5g_status fail_with(f5g_status status, const std::string& msg) {
  last_error = msg;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
f5g_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return F5G_OK;
  } catch (const f5g::Error& e) {
    return fail_with(static_cast<f5g_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(F5G_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(F5G_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

std::set<std::string> split_csv(const char* text) {
  std::set<std::string> out;
  if (!text) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(item);
  return out;
}

}  // namespace

extern "C" {

const char* f5g_version(void) { return "0.1.0"; }

const char* f5g_status_name(f5g_status status) {
  switch (status) {
    case F5G_OK: return "Ok";
    case F5G_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case F5G_ERR_INTERNAL: return "Internal";
    default: break;
  }
  if (status >= F5G_ERR_INVARIANT_VIOLATION && status <= F5G_ERR_IO)
    return f5g::errc_name(static_cast<f5g::Errc>(status)).data();
  return "Unknown";
}

const char* f5g_last_error(void) { return last_error.c_str(); }

f5g_status f5g_scenario_load(const char* path, f5g_scenario** out) {
  if (!path || !out) return fail_with(F5G_ERR_INVALID_ARGUMENT, "path and out are required");
  return guarded([&] { *out = new f5g_scenario{f5g::scenario::load_scenario_file(path)}; });
}

f5g_status f5g_scenario_parse(const char* text, size_t len, f5g_scenario** out) {
  if ((!text && len) || !out) return fail_with(F5G_ERR_INVALID_ARGUMENT, "text and out are required");
  return guarded([&] { *out = new f5g_scenario{f5g::scenario::load_scenario(std::string_view(text ? text : "", len))}; });
}

const char* f5g_scenario_name(const f5g_scenario* scenario) {
  return scenario ? scenario->value.name.c_str() : "";
}

uint64_t f5g_scenario_seed(const f5g_scenario* scenario) { return scenario ? scenario->value.seed : 0; }

void f5g_scenario_free(f5g_scenario* scenario) { delete scenario; }

f5g_status f5g_run(const f5g_scenario* scenario, const uint64_t* seed, f5g_result** out) {
  if (!scenario || !out) return fail_with(F5G_ERR_INVALID_ARGUMENT, "scenario and out are required");
  return guarded([&] {
    std::optional<std::uint64_t> s;
    if (seed) s = *seed;
    auto run = f5g::sim::run(scenario->value, s);
    auto* r = new f5g_result;
    r->trace = run.trace.render();
    r->metrics = f5g::sim::metrics_json(run.metrics);
    r->digest = run.trace.digest();
    *out = r;
  });
}

const char* f5g_result_trace(const f5g_result* result, size_t* len) {
  if (!result) return nullptr;
  if (len) *len = result->trace.size();
  return result->trace.c_str();
}

const char* f5g_result_metrics(const f5g_result* result, size_t* len) {
  if (!result) return nullptr;
  if (len) *len = result->metrics.size();
  return result->metrics.c_str();
}

uint64_t f5g_result_trace_digest(const f5g_result* result) { return result ? result->digest : 0; }

void f5g_result_free(f5g_result* result) { delete result; }

f5g_status f5g_trace_filter(const char* trace, size_t len, const char* nodes, const char* kinds, char** out) {
  if ((!trace && len) || !out) return fail_with(F5G_ERR_INVALID_ARGUMENT, "trace and out are required");
  return guarded([&] {
    std::set<f5g::TraceKind> kind_set;
    for (const auto& k : split_csv(kinds)) {
      auto parsed = f5g::parse_trace_kind(k);
      if (!parsed) f5g::fail(f5g::Errc::SchemaError, "unknown trace kind '" + k + "'");
      kind_set.insert(*parsed);
    }
    auto records = f5g::parse_trace(std::string_view(trace ? trace : "", len));
    std::string text;
    for (const auto& r : f5g::filter_trace(records, split_csv(nodes), kind_set)) text += f5g::render_record(r) + "\n";
    *out = dup_string(text);
  });
}

f5g_status f5g_trace_call_flow(const char* trace, size_t len, const char* ue, char** out) {
  if ((!trace && len) || !ue || !out) return fail_with(F5G_ERR_INVALID_ARGUMENT, "trace, ue and out are required");
  return guarded([&] {
    auto records = f5g::parse_trace(std::string_view(trace ? trace : "", len));
    std::string text;
    for (const auto& line : f5g::analysis::call_flow(records, ue)) text += line + "\n";
    *out = dup_string(text);
  });
}

void f5g_string_free(char* s) { std::free(s); }

f5g_status f5g_frame_describe(const uint8_t* bytes, size_t len, char** out) {
  if ((!bytes && len) || !out) return fail_with(F5G_ERR_INVALID_ARGUMENT, "bytes and out are required");
  return guarded([&] {
    auto f = f5g::frames::decode_frame(f5g::frames::ByteView(bytes, len));
    std::ostringstream os;
    os << f5g::frames::frame_type_name(f.type) << " dst=" << f.dst.to_string() << " src=" << f.src.to_string()
       << " bssid=" << f.bssid.to_string() << " seq=" << f.seq << " body=" << f.body.size();
    *out = dup_string(os.str());
  });
}

f5g_status f5g_frame_encode_data(uint32_t src, uint32_t dst, uint16_t seq, const uint8_t* body, size_t body_len,
                                 uint8_t** out, size_t* out_len) {
  if ((!body && body_len) || !out || !out_len) return fail_with(F5G_ERR_INVALID_ARGUMENT, "out buffers are required");
  return guarded([&] {
    f5g::frames::MacFrame f;
    f.type = f5g::frames::FrameType::Data;
    f.src = f5g::frames::MacAddress::local(src);
    f.dst = f5g::frames::MacAddress::local(dst);
    f.bssid = f.dst;
    f.seq = seq;
    if (body_len) f.body.assign(body, body + body_len);
    auto bytes = f5g::frames::encode_frame(f);
    auto* buf = static_cast<uint8_t*>(std::malloc(bytes.empty() ? 1 : bytes.size()));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, bytes.data(), bytes.size());
    *out = buf;
    *out_len = bytes.size();
  });
}

void f5g_bytes_free(uint8_t* bytes) { std::free(bytes); }

}  // extern "C"
