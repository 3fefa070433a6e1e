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

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nfnoma/config.hpp"
#include "test_support.hpp"

using namespace nfnoma;
namespace fs = std::filesystem;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NFNOMA_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nfnoma_test_config_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("empty object gives the full defaults") {
  const RunConfig c = parse_config_text("{}");
  const ScenarioConfig& s = c.scenario;
  CHECK(s.framework == Framework::kSlb);
  CHECK(s.carrier_hz == 30e9);
  CHECK(s.geometry().spacing == doctest::Approx(s.geometry().wavelength / 2.0));
  CHECK(c.noise_dbm == -90.0);
  CHECK(s.noise_w == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(s.num_clusters() == 4);
  CHECK(s.rate_h_min == 6.0);
  CHECK(s.rate_l_min == 0.5);
  CHECK(s.aod_offset_deg == 0.1);
  CHECK(s.regions == default_regions(Framework::kSlb));
  CHECK(c.schemes == default_schemes(Framework::kSlb));
  CHECK(c.sweep.variable == SweepVariable::kPmaxDbm);
  CHECK(c.sweep.values.size() == 6);
  CHECK(c.trials == 50);
}

TEST_CASE("framework selects its own layout and schemes") {
  const RunConfig c = parse_config_text(R"({"framework": "mlb", "pmax_dbm": 20})");
  CHECK(c.scenario.framework == Framework::kMlb);
  CHECK(c.scenario.regions == default_regions(Framework::kMlb));
  CHECK(c.scenario.aod_offset_deg == 1.0);
  CHECK(c.schemes == default_schemes(Framework::kMlb));
  CHECK(c.scenario.pmax_w == doctest::Approx(0.1));
  CHECK(c.scenario.eta_w == 0.0);
  CHECK(parse_config_text(R"({"matching_eta_dbm": 10})").scenario.eta_w == doctest::Approx(0.01));
}

TEST_CASE("errors name the offending field") {
  CHECK(field_of(R"({"clusters": [{"angle_deg": [-70, -30], "radius_m": [30, 50]}],
                     "schemes": ["slb_nf_noma"]})") == "clusters[0].angle_deg");
  CHECK(field_of(R"({"clusters": [{"angle_deg": [-30, -40], "radius_m": [30, 50]}]})") == "clusters[0].angle_deg");
  CHECK(field_of(R"({"clusters": [{"angle_deg": [0, 1], "radius_m": [30, 50], "colour": 1}]})") ==
        "clusters[0].colour");
  CHECK(field_of(R"({"unknown": true})") == "unknown");
  CHECK(field_of(R"({"solver": {"tolerance": -1}})") == "solver.tolerance");
  CHECK(field_of(R"({"solver": {"step": 1}})") == "solver.step");
  CHECK(field_of(R"({"sweep": {"variable": "noise", "values": [1]}})") == "sweep.variable");
  CHECK(field_of(R"({"sweep": {"variable": "num_antennas", "values": [64, 96.5]}})") == "sweep.values[1]");
  CHECK(field_of(R"({"schemes": ["slb_nf_noma", "best"]})") == "schemes[1]");
  CHECK(field_of(R"({"num_antennas": 1})") == "num_antennas");
  CHECK(field_of(R"({"num_antennas": "many"})") == "num_antennas");
  CHECK(field_of(R"({"pmax_dbm": 400})") == "pmax_dbm");
  CHECK(field_of(R"({"seed": -3})") == "seed");
  CHECK(field_of(R"({"num_rf_chains": 3})") == "schemes");  // the FF OMA schedule needs four clusters
  CHECK(field_of(R"({"num_rf_chains": 3, "schemes": ["slb_nf_noma"]})") == "<no error>");
  CHECK(field_of(R"({"framework": "mlb", "min_antenna_fraction": 0.7})") == "min_antenna_fraction");
  CHECK(field_of(R"({"clusters": [{"same_angle_as": 0, "radius_m": [1, 2]}]})") == "clusters[0].same_angle_as");
  CHECK(field_of("{ not json") == "<document>");
  CHECK(field_of("[]") == "<root>");
}

TEST_CASE("serialisation round-trips randomised configs") {
  auto rng = testing::make_rng(1234);
  const std::vector<Scheme> all{Scheme::kSlbNfNoma, Scheme::kNfOma,        Scheme::kFfNomaOma, Scheme::kMlbNfNoma,
                                Scheme::kRandMlbNfNoma, Scheme::kFixedMlbNfNoma, Scheme::kMbFfNoma};
  for (int trial = 0; trial < 200; ++trial) {
    RunConfig c;
    ScenarioConfig& s = c.scenario;
    s.framework = trial % 2 == 0 ? Framework::kSlb : Framework::kMlb;
    s.num_antennas = 16 + static_cast<int>(rng() % 1000);
    s.carrier_hz = testing::uniform(rng, 1e9, 1e11);
    c.noise_dbm = testing::uniform(rng, -120.0, -60.0);
    c.pmax_dbm = testing::uniform(rng, 0.0, 50.0);
    if (trial % 3 == 0) c.matching_eta_dbm = testing::uniform(rng, -30.0, 30.0);
    s.rate_h_min = testing::uniform(rng, 0.0, 10.0);
    s.rate_l_min = testing::uniform(rng, 0.0, 2.0);
    s.aod_offset_deg = testing::uniform(rng, 0.0, 2.0);
    s.min_antenna_fraction = testing::uniform(rng, 0.05, 0.45);
    s.h_user = trial % 5 == 0 ? HUserRule::kNearer : HUserRule::kFarther;
    s.svd = trial % 7 == 0 ? SvdConvention::kConjugate : SvdConvention::kTranspose;
    s.regions.clear();
    const int mrf = 4;
    for (int m = 0; m < mrf; ++m) {
      ClusterRegion r;
      const double lo = testing::uniform(rng, -60.0, 50.0);
      r.angle_deg = {lo, lo + testing::uniform(rng, 0.0, 60.0 - 2.0 - lo)};
      const double rlo = testing::uniform(rng, 2.0, 100.0);
      r.radius_m = {rlo, rlo + testing::uniform(rng, 0.0, 50.0)};
      if (m == 2 && trial % 2 == 0) r = ClusterRegion{s.regions[1].angle_deg, r.radius_m, 1};
      s.regions.push_back(r);
    }
    s.solver.tolerance = testing::uniform(rng, 1e-10, 1e-6);
    s.solver.max_newton_steps = 100 + static_cast<int>(rng() % 5000);
    s.solver.barrier_growth = testing::uniform(rng, 2.0, 50.0);
    c.sweep = {SweepVariable::kRateLMin, {testing::uniform(rng, 0.0, 1.0), testing::uniform(rng, 1.0, 2.0)}};
    c.schemes = {all[static_cast<std::size_t>(trial) % all.size()], all[static_cast<std::size_t>(trial + 3) % all.size()]};
    c.output_dir = "out/run_" + std::to_string(trial);
    c.trials = 1 + static_cast<int>(rng() % 500);
    c.seed = rng();
    c.threads = 1 + static_cast<int>(rng() % 16);
    s.noise_w = dbm_to_watts(c.noise_dbm);
    s.pmax_w = dbm_to_watts(c.pmax_dbm);
    s.eta_w = c.matching_eta_dbm ? dbm_to_watts(*c.matching_eta_dbm) : 0.0;

    const std::string text = serialize_config(c);
    CAPTURE(text);
    const RunConfig back = parse_config_text(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
  }
}

TEST_CASE("stream and file input") {
  std::istringstream in(R"({"trials": 7})");
  CHECK(parse_config(in).trials == 7);
  const fs::path dir = scratch_dir("files");
  std::ofstream(dir / "c.json") << R"({"seed": 99})";
  CHECK(parse_config_file(dir / "c.json").seed == 99);
  CHECK_THROWS_AS(parse_config_file(dir / "missing.json"), ConfigError);
}

TEST_CASE("cli validate and dry run") {
  const fs::path dir = scratch_dir("cli");
  std::ofstream(dir / "ok.json") << R"({"trials": 2, "sweep": {"values": [20]}})";
  std::ofstream(dir / "bad.json") << R"({"trials": 2, "bogus": 1})";
  CHECK(run_cli("validate --config " + (dir / "ok.json").string() + " > " + (dir / "v.json").string()) == 0);
  CHECK(parse_config_file(dir / "v.json") == parse_config_file(dir / "ok.json"));
  CHECK(run_cli("validate --config " + (dir / "bad.json").string() + " 2> /dev/null") != 0);
  CHECK(run_cli("run --dry-run --config " + (dir / "ok.json").string() + " --out " + (dir / "dry").string() +
                " > /dev/null") == 0);
  CHECK_FALSE(fs::exists(dir / "dry"));
  CHECK(run_cli("run --config " + (dir / "bad.json").string() + " 2> /dev/null") != 0);
  CHECK(run_cli("frobnicate 2> /dev/null > /dev/null") != 0);
}

TEST_CASE("cli run emits one row per value, scheme and metric") {
  const fs::path dir = scratch_dir("rows");
  std::ofstream(dir / "c.json") << R"({"num_antennas": 32, "trials": 2, "sweep": {"values": [10, 20, 30]},
                                      "schemes": ["slb_nf_noma", "ff_noma_oma"]})";
  REQUIRE(run_cli("run --config " + (dir / "c.json").string() + " --out " + (dir / "out").string() +
                  " > /dev/null") == 0);
  std::istringstream csv(read_file(dir / "out" / "curves.csv"));
  std::string line;
  int rows = -1;  // header
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 3 * 2 * 3);
  CHECK(parse_config_file(dir / "out" / "config.json").trials == 2);
}

TEST_CASE("cli gain map reproduces the three SLB foci") {
  const fs::path dir = scratch_dir("gainmap");
  const std::string out = (dir / "map.csv").string();
  const std::string args =
      "gainmap --framework slb --antennas 1024 --focus 30,-30 --focus 25,40 --focus 60,40 "
      "--r-min 10 --r-max 90 --r-points 81 --theta-min-deg -60 --theta-max-deg 60 --theta-points 121 --out ";
  REQUIRE(run_cli(args + out) == 0);
  REQUIRE(run_cli(args + out + ".2") == 0);
  const std::string bytes = read_file(out);
  CHECK(bytes == read_file(out + ".2"));

  // Grid is 1 m by 1 degree; each focus is a grid point and carries the full gain.
  std::istringstream csv(bytes);
  std::string line;
  std::getline(csv, line);
  std::vector<std::vector<double>> rows;
  std::vector<double> radii;
  while (std::getline(csv, line)) {
    std::stringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    radii.push_back(std::stod(cell));
    rows.emplace_back();
    while (std::getline(ls, cell, ',')) rows.back().push_back(std::stod(cell));
  }
  REQUIRE(rows.size() == 81);
  REQUIRE(rows[0].size() == 121);
  auto at = [&](double r, double deg) { return rows[static_cast<std::size_t>(r - 10)][static_cast<std::size_t>(deg + 60)]; };
  CHECK(at(30, -30) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(at(25, 40) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(at(60, 40) == doctest::Approx(1.0).epsilon(1e-9));
  // Away from every focus, in a direction none of the beams steers to.
  CHECK(at(50, 0) < 0.1);
  // Same direction, different distance: focusing separates the two 40 degree foci.
  CHECK(at(42, 40) < 0.5);

  CHECK(run_cli("gainmap --framework mlb --antennas 256 --focus 25,-50,35,-40 --r-points 5 --theta-points 5 --out " +
                (dir / "mlb.csv").string()) == 0);
  CHECK(run_cli("gainmap --framework slb --focus 30 --out " + (dir / "x.csv").string() + " 2> /dev/null") != 0);
}
