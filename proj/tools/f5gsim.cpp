// Command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "frugal5g/frugal5g.h"

namespace {

int report(f5g_status status) {
  std::cerr << "error: " << f5g_last_error() << "\n";
  return status == F5G_ERR_SCHEMA || status == F5G_ERR_IO ? 2 : 3;
}

bool write_file(const std::string& path, const char* data, size_t len) {
  std::ofstream out(path, std::ios::binary);
  out.write(data, static_cast<std::streamsize>(len));
  return static_cast<bool>(out);
}

int cmd_run(const std::string& path, std::optional<uint64_t> seed, const std::string& trace_out,
            const std::string& metrics_out) {
  f5g_scenario* sc = nullptr;
  if (auto st = f5g_scenario_load(path.c_str(), &sc); st != F5G_OK) return report(st);
  f5g_result* res = nullptr;
  auto st = f5g_run(sc, seed ? &*seed : nullptr, &res);
  f5g_scenario_free(sc);
  if (st != F5G_OK) return report(st);

  size_t trace_len = 0, metrics_len = 0;
  const char* trace = f5g_result_trace(res, &trace_len);
  const char* metrics = f5g_result_metrics(res, &metrics_len);
  int rc = 0;
  if (!trace_out.empty() && !write_file(trace_out, trace, trace_len)) {
    std::cerr << "error: cannot write " << trace_out << "\n";
    rc = 2;
  }
  if (!metrics_out.empty()) {
    if (!write_file(metrics_out, metrics, metrics_len)) {
      std::cerr << "error: cannot write " << metrics_out << "\n";
      rc = 2;
    }
  } else {
    std::fwrite(metrics, 1, metrics_len, stdout);
  }
  f5g_result_free(res);
  return rc;
}

int cmd_validate(const std::string& path) {
  f5g_scenario* sc = nullptr;
  if (auto st = f5g_scenario_load(path.c_str(), &sc); st != F5G_OK) return report(st);
  std::cout << "ok " << f5g_scenario_name(sc) << "\n";
  f5g_scenario_free(sc);
  return 0;
}

int cmd_filter(const std::string& path, const std::string& nodes, const std::string& kinds,
               const std::string& call_flow) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  char* out = nullptr;
  auto st = call_flow.empty() ? f5g_trace_filter(text.data(), text.size(), nodes.c_str(), kinds.c_str(), &out)
                              : f5g_trace_call_flow(text.data(), text.size(), call_flow.c_str(), &out);
  if (st != F5G_OK) return report(st);
  std::fputs(out, stdout);
  f5g_string_free(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frugal5g access-network simulator"};
  app.require_subcommand(1);

  std::string scenario, trace_out, metrics_out;
  std::optional<uint64_t> seed;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("scenario", scenario, "scenario file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--trace", trace_out, "write the trace here");
  run->add_option("--metrics", metrics_out, "write metrics JSON here (default: stdout)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", validate_path, "scenario file")->required();

  std::string trace_path, nodes, kinds, call_flow;
  auto* filter = app.add_subcommand("trace-filter", "select trace records");
  filter->add_option("trace", trace_path, "trace file")->required();
  filter->add_option("--node", nodes, "comma-separated node ids");
  filter->add_option("--kind", kinds, "comma-separated record kinds");
  filter->add_option("--call-flow", call_flow, "print the attach call flow of this UE instead");

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(scenario, seed, trace_out, metrics_out);
  if (*validate) return cmd_validate(validate_path);
  return cmd_filter(trace_path, nodes, kinds, call_flow);
}
