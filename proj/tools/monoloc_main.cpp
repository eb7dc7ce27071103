// monoloc: tuning-parameter-free target localization from sensor energies.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "monoloc/estimators.hpp"
#include "monoloc/frames.hpp"
#include "monoloc/inference.hpp"
#include "monoloc/io.hpp"
#include "monoloc/simulation.hpp"

namespace {

using namespace monoloc;

struct DirectionChoice {
  std::string value = "auto";  // auto | inc | dec
};

/// Fit with a fixed direction, or both directions keeping the smaller
/// profiled SSE at the solution when "auto".
LocationEstimate fit_with_direction(const SensorDataset& data, Method method,
                                    const std::string& direction, const SearchConfig& config) {
  auto run = [&](Direction dir) {
    return method == Method::LSE ? estimate_lse(data, dir, config)
                                 : estimate_ssce(data, dir, config);
  };
  if (direction == "dec") return run(Direction::NonIncreasing);
  if (direction == "inc") return run(Direction::NonDecreasing);
  LocationEstimate dec = run(Direction::NonIncreasing);
  LocationEstimate inc = run(Direction::NonDecreasing);
  return dec.sse <= inc.sse ? dec : inc;
}

int run_fit(const std::string& data_path, const std::string& method_name,
            const std::string& direction, const std::string& out_path, std::uint64_t seed) {
  SensorDataset data = read_sensor_csv(data_path);
  Method method = method_name == "lse" ? Method::LSE : Method::SSCE;
  SearchConfig config;
  config.seed = seed;
  LocationEstimate est = fit_with_direction(data, method, direction, config);
  nlohmann::json report = fit_report(est, data);
  write_text_file(out_path, report.dump(2) + "\n");
  std::cout << "theta =";
  for (Eigen::Index j = 0; j < est.theta.size(); ++j) std::cout << ' ' << est.theta[j];
  std::cout << "  (" << method_name << ", " << direction_name(est.direction)
            << ", objective " << est.objective_at_solution << ")\n";
  return est.converged ? 0 : 1;
}

int run_bootstrap(const std::string& data_path, const std::string& method_name,
                  const std::string& direction, double m_exp, int B, std::uint64_t seed,
                  bool wild, const std::string& out_path) {
  SensorDataset data = read_sensor_csv(data_path);
  EstimatorSpec spec;
  spec.method = method_name == "lse" ? Method::LSE : Method::SSCE;
  spec.config.seed = seed;
  if (direction == "auto") {
    LocationEstimate chosen =
        fit_with_direction(data, spec.method, direction, spec.config);
    spec.direction = chosen.direction;
  } else {
    spec.direction = direction == "inc" ? Direction::NonDecreasing : Direction::NonIncreasing;
  }

  BootstrapSummary summary;
  if (wild) {
    summary = bootstrap_wild(data, spec, B, seed);
  } else {
    int m = static_cast<int>(std::floor(std::pow(static_cast<double>(data.n()), m_exp)));
    summary = bootstrap_m_of_n(data, spec, m, B, seed);
  }
  nlohmann::json report = bootstrap_report(summary, spec, data);
  write_text_file(out_path, report.dump(2) + "\n");
  std::cout << (wild ? "wild" : "m-out-of-n") << " bootstrap: m = " << summary.m
            << ", effective B = " << summary.effective_B << "\n";
  return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& out_path,
                 const std::string& json_path) {
  ScenarioFile file = read_scenario_json(scenario_path);
  if (file.study == "generate") {
    SensorDataset data = generate(file.scenario);
    write_sensor_csv(out_path, data);
    std::cout << "wrote " << data.n() << " sensors to " << out_path << "\n";
    return 0;
  }
  if (file.study == "coverage") {
    auto rows = run_coverage_study({file.scenario}, file.n_list, file.bootstrap, file.level);
    write_text_file(out_path, coverage_rows_csv(rows));
    if (!json_path.empty())
      write_text_file(json_path, coverage_rows_json(rows).dump(2) + "\n");
    std::cout << coverage_rows_csv(rows);
    return 0;
  }
  auto rows = run_variance_study({file.scenario}, file.n_list, file.methods);
  write_text_file(out_path, variance_rows_csv(rows));
  if (!json_path.empty())
    write_text_file(json_path, variance_rows_json(rows).dump(2) + "\n");
  std::cout << variance_rows_csv(rows);
  return 0;
}

FrameStack load_background_dir(const std::string& dir) {
  FrameStack stack;
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".csv") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    stack.frames.push_back(p.extension() == ".pgm" ? read_pgm(p.string())
                                                   : read_matrix_csv(p.string()));
    stack.labels.push_back(p.stem().string());
  }
  if (stack.frames.empty())
    throw std::runtime_error("no .pgm or .csv frames found in " + dir);
  return stack;
}

int run_frame(const std::vector<std::string>& targets,
              const std::vector<std::string>& background_dirs, int grid, std::uint64_t seed,
              int B, double m_exp, const std::string& out_path) {
  if (background_dirs.size() != targets.size() && background_dirs.size() != 1)
    throw std::runtime_error("need one --background-dir per --target (or a single shared one)");

  FrameStack target_stack;
  for (const auto& t : targets) {
    std::filesystem::path p(t);
    target_stack.frames.push_back(p.extension() == ".pgm" ? read_pgm(t) : read_matrix_csv(t));
    target_stack.labels.push_back(p.stem().string());
  }
  std::vector<FrameStack> backgrounds;
  for (std::size_t c = 0; c < targets.size(); ++c) {
    const std::string& dir =
        background_dirs.size() == 1 ? background_dirs.front() : background_dirs[c];
    backgrounds.push_back(load_background_dir(dir));
  }

  FramePipelineConfig config;
  config.grid_k = grid;
  config.seed = seed;
  config.bootstrap_B = B;
  config.m_exponent = m_exp;
  PipelineReport report = locate_in_frame(target_stack, backgrounds, config);
  write_text_file(out_path, frame_report(report).dump(2) + "\n");

  for (const ChannelReport& ch : report.channels) {
    std::cout << ch.label << ": ";
    if (ch.ok) {
      std::cout << "theta = (" << ch.estimate.theta[0] << ", " << ch.estimate.theta[1]
                << "), direction " << direction_name(ch.direction) << "\n";
    } else {
      std::cout << "FAILED: " << ch.error << "\n";
    }
  }
  return report.all_converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monoloc: semiparametric target localization from sensor energies"};
  app.require_subcommand(1);

  // fit
  std::string data_path, out_path = "report.json", method = "ssce", direction = "auto";
  std::uint64_t seed = 20240817;
  auto* fit = app.add_subcommand("fit", "estimate the target location from a sensor CSV");
  fit->add_option("--data", data_path, "sensor CSV (header x1,...,xd,y)")->required();
  fit->add_option("--method", method, "ssce | lse")
      ->check(CLI::IsMember({"ssce", "lse"}));
  fit->add_option("--direction", direction, "auto | inc | dec")
      ->check(CLI::IsMember({"auto", "inc", "dec"}));
  fit->add_option("--out", out_path, "report JSON path");
  fit->add_option("--seed", seed, "search seed");

  // bootstrap
  std::string b_data, b_out = "bootstrap.json", b_method = "ssce", b_direction = "auto";
  double m_exp = 0.875;
  int B = 200;
  std::uint64_t b_seed = 20240817;
  bool wild = false;
  auto* boot = app.add_subcommand("bootstrap", "confidence regions via resampling");
  boot->add_option("--data", b_data, "sensor CSV")->required();
  boot->add_option("--method", b_method, "ssce | lse")
      ->check(CLI::IsMember({"ssce", "lse"}));
  boot->add_option("--direction", b_direction, "auto | inc | dec")
      ->check(CLI::IsMember({"auto", "inc", "dec"}));
  boot->add_option("--m-exp", m_exp, "m = floor(n^m_exp)");
  boot->add_option("--B", B, "bootstrap replicates");
  boot->add_option("--seed", b_seed, "master seed");
  boot->add_flag("--wild", wild, "Mammen wild bootstrap instead of m-out-of-n");
  boot->add_option("--out", b_out, "report JSON path");

  // simulate
  std::string scen_path, sim_out = "results.csv", sim_json;
  auto* sim = app.add_subcommand("simulate", "run a scenario study (variance/coverage/generate)");
  sim->add_option("--scenario", scen_path, "scenario JSON")->required();
  sim->add_option("--out", sim_out, "CSV output path (or sensor CSV for generate)");
  sim->add_option("--json", sim_json, "optional JSON diagnostics path");

  // frame
  std::vector<std::string> targets, background_dirs;
  int grid = 100;
  std::uint64_t f_seed = 20240817;
  int f_B = 200;
  double f_mexp = 0.875;
  std::string f_out = "frame.json";
  auto* frame = app.add_subcommand("frame", "locate a target in an image frame");
  frame->add_option("--target", targets, "per-channel frame (PGM or CSV matrix)")
      ->required()
      ->take_all();
  frame->add_option("--background-dir", background_dirs,
                    "directory of empty frames (one per channel, or one shared)")
      ->required()
      ->take_all();
  frame->add_option("--grid", grid, "subsample grid side k (k^2 sensors)");
  frame->add_option("--seed", f_seed, "pipeline seed");
  frame->add_option("--B", f_B, "bootstrap replicates per channel");
  frame->add_option("--m-exp", f_mexp, "bootstrap m = floor(n^m_exp)");
  frame->add_option("--out", f_out, "report JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return run_fit(data_path, method, direction, out_path, seed);
    if (boot->parsed())
      return run_bootstrap(b_data, b_method, b_direction, m_exp, B, b_seed, wild, b_out);
    if (sim->parsed()) return run_simulate(scen_path, sim_out, sim_json);
    if (frame->parsed())
      return run_frame(targets, background_dirs, grid, f_seed, f_B, f_mexp, f_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
