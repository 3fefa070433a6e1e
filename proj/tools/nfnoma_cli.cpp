// Copyright 2026 The nfnoma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// nfnoma: Monte Carlo runs, beam gain maps and config validation.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nfnoma/analog.hpp"
#include "nfnoma/config.hpp"
#include "nfnoma/geometry.hpp"
#include "nfnoma/log.hpp"
#include "nfnoma/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace nfnoma;

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::string out;
  bool dry_run = false;
};

struct GainmapArgs {
  std::string framework = "slb";
  int antennas = 1024;
  double carrier_hz = 30e9;
  std::vector<std::string> foci;  // "r,deg" (slb) or "rh,degh,rl,degl" (mlb)
  int num_h = 0;                  // mlb: 0 selects half the array
  double r_min = 5.0;
  double r_max = 100.0;
  double theta_min_deg = -60.0;
  double theta_max_deg = 60.0;
  int r_points = 200;
  int theta_points = 241;
  std::string out = "-";
};

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(text);
  ss.imbue(std::locale::classic());
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument(what + ": cannot parse '" + text + "'");
    v.push_back(x);
  }
  if (v.size() != expected) {
    throw std::invalid_argument(what + ": expected " + std::to_string(expected) + " comma-separated numbers, got '" +
                                text + "'");
  }
  return v;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bytes;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

int cmd_validate(const std::string& path) {
  const RunConfig config = parse_config_file(path);
  std::cout << serialize_config(config);
  return 0;
}

int cmd_run(const RunArgs& args) {
  RunConfig config = parse_config_file(args.config);
  if (args.seed) config.seed = *args.seed;
  if (args.trials) {
    if (*args.trials < 1) throw ConfigError("--trials", "must be >= 1");
    config.trials = *args.trials;
  }
  if (args.threads) {
    if (*args.threads < 1) throw ConfigError("--threads", "must be >= 1");
    config.threads = *args.threads;
  }
  if (!args.out.empty()) config.output_dir = args.out;

  if (args.dry_run) {
    std::cout << "config ok: " << config.schemes.size() << " schemes x " << config.sweep.values.size()
              << " sweep points x " << config.trials << " trials\n";
    return 0;
  }

  log_message(LogLevel::kInfo, "run: " + std::to_string(config.trials) + " trials, seed " +
                                   std::to_string(config.seed) + ", " + std::to_string(config.threads) + " threads");
  const MonteCarloOutput result =
      monte_carlo(config.scenario, config.sweep, config.schemes, config.monte_carlo_options());

  std::ostringstream csv;
  write_curve_csv(csv, result.rows);

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  // The resolved config excludes the thread count so the directory contents do not depend on it.
  RunConfig resolved = config;
  resolved.threads = 1;
  write_file(dir / "curves.csv", csv.str());
  write_file(dir / "config.json", serialize_config(resolved));
  for (const auto& row : result.rows) {
    if (row.n_feasible < row.n_total && row.metric == "sum_rate_h") {
      log_message(LogLevel::kInfo, row.scheme + " at " + row.sweep_var + "=" + std::to_string(row.value) + ": " +
                                       std::to_string(row.n_total - row.n_feasible) + " infeasible trials");
    }
  }
  std::cout << "wrote " << (dir / "curves.csv").string() << " (" << result.rows.size() << " rows)\n";
  return 0;
}

int cmd_gainmap(const GainmapArgs& args) {
  if (args.antennas < 2) throw std::invalid_argument("--antennas: must be >= 2");
  if (args.foci.empty()) throw std::invalid_argument("--focus: at least one focus is required");
  const ArrayGeometry geometry = ArrayGeometry::from_carrier(args.antennas, args.carrier_hz);
  std::vector<AnalogBeamformer> beams;
  for (const auto& f : args.foci) {
    if (args.framework == "slb") {
      const auto v = parse_numbers(f, 2, "--focus");
      beams.push_back(slb_beamformer(geometry, UserLocation(v[0], deg_to_rad(v[1]))));
    } else if (args.framework == "mlb") {
      const auto v = parse_numbers(f, 4, "--focus");
      const int num_h = args.num_h > 0 ? args.num_h : args.antennas / 2;
      const AntennaSplit split{num_h, args.antennas - num_h};
      beams.push_back(mlb_beamformer(geometry, split, UserLocation(v[0], deg_to_rad(v[1])),
                                     UserLocation(v[2], deg_to_rad(v[3]))));
    } else {
      throw std::invalid_argument("--framework: expected slb or mlb");
    }
  }
  GainMapGrid grid;
  grid.radius_min = args.r_min;
  grid.radius_max = args.r_max;
  grid.angle_min = deg_to_rad(args.theta_min_deg);
  grid.angle_max = deg_to_rad(args.theta_max_deg);
  grid.radial_points = args.r_points;
  grid.angular_points = args.theta_points;
  if (!(args.theta_min_deg > -90.0 && args.theta_max_deg < 90.0)) {
    throw std::invalid_argument("--theta-min-deg/--theta-max-deg: must lie in (-90, 90)");
  }
  const GainMap map = gain_map(beams, geometry, grid);
  std::ostringstream csv;
  write_gain_map_csv(csv, map);
  if (args.out == "-") {
    std::cout << csv.str();
  } else {
    write_file(args.out, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field NOMA beamforming simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the Monte Carlo sweep described by a config file");
  run_cmd->add_option("--config", run.config, "JSON config file, '-' for stdin")->required();
  run_cmd->add_option("--seed", run.seed, "Override the config seed");
  run_cmd->add_option("--trials", run.trials, "Override the number of drops per sweep point");
  run_cmd->add_option("--threads", run.threads, "Worker threads");
  run_cmd->add_option("--out", run.out, "Output directory (overrides output_dir)");
  run_cmd->add_flag("--dry-run", run.dry_run, "Validate the config and exit");

  GainmapArgs gm;
  auto* gm_cmd = app.add_subcommand("gainmap", "Write the array gain map of focused beams as CSV");
  gm_cmd->add_option("--framework", gm.framework, "slb or mlb")->check(CLI::IsMember({"slb", "mlb"}));
  gm_cmd->add_option("--antennas", gm.antennas, "Array size");
  gm_cmd->add_option("--carrier-hz", gm.carrier_hz, "Carrier frequency");
  gm_cmd->add_option("--focus", gm.foci, "slb: r_m,theta_deg; mlb: rh_m,thetah_deg,rl_m,thetal_deg (repeatable)")
      ->required();
  gm_cmd->add_option("--num-h", gm.num_h, "mlb: antennas on the H sub-array (default half)");
  gm_cmd->add_option("--r-min", gm.r_min, "Smallest radius [m]");
  gm_cmd->add_option("--r-max", gm.r_max, "Largest radius [m]");
  gm_cmd->add_option("--theta-min-deg", gm.theta_min_deg, "Smallest angle [deg]");
  gm_cmd->add_option("--theta-max-deg", gm.theta_max_deg, "Largest angle [deg]");
  gm_cmd->add_option("--r-points", gm.r_points, "Radial grid points");
  gm_cmd->add_option("--theta-points", gm.theta_points, "Angular grid points");
  gm_cmd->add_option("--out", gm.out, "Output CSV, '-' for stdout");

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  val_cmd->add_option("--config", validate_path, "JSON config file, '-' for stdin")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*gm_cmd) return cmd_gainmap(gm);
    if (*val_cmd) return cmd_validate(validate_path);
  } catch (const ConfigError& e) {
    log_message(LogLevel::kError, std::string("config error at ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log_message(LogLevel::kError, e.what());
    return 1;
  }
  return 1;
}
