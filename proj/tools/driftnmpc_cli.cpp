// Command line front end: single closed-loop runs, sweep batches, and KPI
// extraction from recorded traces.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "driftnmpc/config_io.hpp"
#include "driftnmpc/simulate.hpp"
#include "driftnmpc/trace.hpp"

namespace fs = std::filesystem;
using namespace driftnmpc;

namespace {

std::string run_stem(const std::string& scenario, Variant variant,
                     std::optional<double> delta_r_max_deg) {
  std::string stem = scenario + "_" + variant_name(variant);
  if (delta_r_max_deg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_dr%02d", static_cast<int>(*delta_r_max_deg + 0.5));
    stem += buf;
  }
  return stem;
}

RunResult execute(const AppConfig& cfg, Variant variant, const std::string& scenario,
                  std::optional<double> delta_r_max_deg, const fs::path& out_dir,
                  const std::string& stem, bool quiet) {
  const RunSetup setup = make_run_setup(cfg, variant, scenario, delta_r_max_deg);
  const RunResult res = run_closed_loop(setup);

  fs::create_directories(out_dir);
  write_trace_csv((out_dir / (stem + "_trace.csv")).string(), res.trace);
  write_kpi_json((out_dir / (stem + "_kpi.json")).string(),
                 kpi_json(res, scenario, variant, delta_r_max_deg));

  if (!quiet) {
    std::printf("%-22s %-12s t=%6.2fs s=%7.2fm |e_y|max=%6.3fm rms(e_y)=%6.3fm rms(e_vx)=%5.2fkm/h |beta|max=%5.1fdeg\n",
                stem.c_str(), outcome_name(res.outcome), res.t_end, res.s_end,
                res.kpis.e_y_abs_max, res.kpis.e_y_rms, res.kpis.e_vx_rms_kmh,
                res.kpis.beta_abs_max_deg);
  }
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drift-capable path-tracking NMPC workbench"};
  app.require_subcommand(1);

  std::string config_file = "config/default.json";
  std::string out_dir = "out";

  auto* run_cmd = app.add_subcommand("run", "simulate one closed-loop manoeuvre");
  std::string variant_str = "mz";
  std::string scenario = "turn135";
  double delta_r_max = -1.0;
  run_cmd->add_option("--variant", variant_str, "controller variant: bas, mz or mz-dr");
  run_cmd->add_option("--scenario", scenario, "scenario name from the config");
  run_cmd->add_option("--config", config_file, "config JSON");
  run_cmd->add_option("--delta-r-max", delta_r_max, "rear steer limit override [deg]");
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a batch described by a sweep matrix");
  std::string matrix_file;
  sweep_cmd->add_option("--matrix", matrix_file, "sweep matrix JSON")->required();
  sweep_cmd->add_option("--config", config_file, "config JSON");
  sweep_cmd->add_option("--out", out_dir, "output directory");

  auto* kpi_cmd = app.add_subcommand("kpi", "recompute KPIs from a recorded trace");
  std::string trace_file;
  kpi_cmd->add_option("trace", trace_file, "trace CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const AppConfig cfg = load_config(config_file);
      const Variant variant = variant_from_name(variant_str);
      std::optional<double> dr;
      if (delta_r_max >= 0.0) dr = delta_r_max;
      const std::string stem = run_stem(scenario, variant, dr);
      const RunResult res = execute(cfg, variant, scenario, dr, out_dir, stem, false);
      return res.exit_code();
    }

    if (sweep_cmd->parsed()) {
      const AppConfig cfg = load_config(config_file);
      const auto runs = load_sweep(matrix_file);
      nlohmann::ordered_json summary = nlohmann::ordered_json::array();
      for (const auto& r : runs) {
        const Variant variant = r.variant;
        const RunResult res =
            execute(cfg, variant, r.scenario, r.delta_r_max_deg, out_dir, r.label, false);
        nlohmann::ordered_json j = kpi_json(res, r.scenario, variant, r.delta_r_max_deg);
        j["label"] = r.label;
        summary.push_back(j);
      }
      fs::create_directories(out_dir);
      write_kpi_json((fs::path(out_dir) / "summary.json").string(), summary);
      return 0;
    }

    if (kpi_cmd->parsed()) {
      const auto trace = read_trace_csv(trace_file);
      const Kpis k = compute_kpis(trace);
      nlohmann::ordered_json j;
      j["schema"] = kKpiSchema;
      j["source"] = trace_file;
      j["kpis"]["e_y_abs_max_m"] = k.e_y_abs_max;
      j["kpis"]["e_y_rms_m"] = k.e_y_rms;
      j["kpis"]["e_vx_rms_kmh"] = k.e_vx_rms_kmh;
      j["kpis"]["beta_abs_max_deg"] = k.beta_abs_max_deg;
      j["kpis"]["samples"] = k.samples;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
