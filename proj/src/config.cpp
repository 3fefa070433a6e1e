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

#include "nfnoma/config.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace nfnoma {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

long long get_integer(const json& j, const std::string& path, long long lo, long long hi) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  // Unsigned values above the signed range land here as well.
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
    throw ConfigError(path, "out of range");
  }
  const long long v = j.get<long long>();
  if (v < lo || v > hi) {
    throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

Range get_range(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [lower, upper]");
  Range r{get_number(j[0], index(path, 0)), get_number(j[1], index(path, 1))};
  if (r.lo > r.hi) throw ConfigError(path, "lower bound exceeds upper bound");
  return r;
}

template <typename Fn>
void maybe(const json& j, const char* key, Fn&& fn) {
  if (auto it = j.find(key); it != j.end()) fn(*it);
}

std::vector<ClusterRegion> parse_clusters(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array");
  std::vector<ClusterRegion> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = index(path, i);
    const json& c = j[i];
    expect_object(c, at, {"angle_deg", "radius_m", "same_angle_as"});
    ClusterRegion r;
    if (!c.contains("radius_m")) throw ConfigError(join(at, "radius_m"), "required");
    r.radius_m = get_range(c["radius_m"], join(at, "radius_m"));
    maybe(c, "same_angle_as", [&](const json& v) {
      r.same_angle_as = static_cast<int>(get_integer(v, join(at, "same_angle_as"), 0, static_cast<long long>(i) - 1));
    });
    if (c.contains("angle_deg")) {
      if (r.same_angle_as >= 0) throw ConfigError(join(at, "angle_deg"), "not allowed together with same_angle_as");
      r.angle_deg = get_range(c["angle_deg"], join(at, "angle_deg"));
    } else if (r.same_angle_as < 0) {
      throw ConfigError(join(at, "angle_deg"), "required unless same_angle_as is given");
    } else {
      r.angle_deg = out[static_cast<std::size_t>(r.same_angle_as)].angle_deg;
    }
    out.push_back(r);
  }
  return out;
}

SolverOptions parse_solver(const json& j, const std::string& path) {
  expect_object(j, path,
                {"tolerance", "max_newton_steps", "initial_barrier", "barrier_growth", "outer_tolerance",
                 "max_outer_iterations"});
  SolverOptions s;
  auto positive = [&](const char* key, double& dst) {
    maybe(j, key, [&](const json& v) {
      dst = get_number(v, join(path, key));
      if (!(dst > 0.0)) throw ConfigError(join(path, key), "must be > 0");
    });
  };
  positive("tolerance", s.tolerance);
  positive("initial_barrier", s.initial_barrier);
  positive("outer_tolerance", s.outer_tolerance);
  positive("barrier_growth", s.barrier_growth);
  if (!(s.barrier_growth > 1.0)) throw ConfigError(join(path, "barrier_growth"), "must be > 1");
  maybe(j, "max_newton_steps", [&](const json& v) {
    s.max_newton_steps = static_cast<int>(get_integer(v, join(path, "max_newton_steps"), 1, 10'000'000));
  });
  maybe(j, "max_outer_iterations", [&](const json& v) {
    s.max_outer_iterations = static_cast<int>(get_integer(v, join(path, "max_outer_iterations"), 1, 1'000'000));
  });
  return s;
}

SweepSpec parse_sweep(const json& j, const std::string& path) {
  expect_object(j, path, {"variable", "values"});
  SweepSpec s;
  maybe(j, "variable", [&](const json& v) {
    const auto var = parse_sweep_variable(get_string(v, join(path, "variable")));
    if (!var) throw ConfigError(join(path, "variable"), "expected one of pmax_dbm, num_antennas, rate_l_min");
    s.variable = *var;
  });
  if (!j.contains("values")) throw ConfigError(join(path, "values"), "required");
  const json& vals = j["values"];
  if (!vals.is_array() || vals.empty()) throw ConfigError(join(path, "values"), "expected a non-empty array");
  for (std::size_t i = 0; i < vals.size(); ++i) s.values.push_back(get_number(vals[i], index(join(path, "values"), i)));
  return s;
}

const char* framework_name(Framework f) { return f == Framework::kSlb ? "slb" : "mlb"; }
const char* h_user_name(HUserRule r) { return r == HUserRule::kFarther ? "farther" : "nearer"; }
const char* svd_name(SvdConvention c) { return c == SvdConvention::kTranspose ? "transpose" : "conjugate"; }

RunConfig from_json(const json& j) {
  expect_object(j, "",
                {"framework", "num_antennas", "num_rf_chains", "carrier_hz", "noise_dbm", "pmax_dbm",
                 "rate_h_min_bps_hz", "rate_l_min_bps_hz", "clusters", "aod_offset_deg", "min_antenna_fraction",
                 "h_user", "matching_eta_dbm", "svd_convention", "solver", "sweep", "schemes", "output_dir",
                 "trials", "seed", "threads"});
  RunConfig c;
  ScenarioConfig& s = c.scenario;

  maybe(j, "framework", [&](const json& v) {
    const std::string f = get_string(v, "framework");
    if (f == "slb") {
      s.framework = Framework::kSlb;
    } else if (f == "mlb") {
      s.framework = Framework::kMlb;
    } else {
      throw ConfigError("framework", "expected \"slb\" or \"mlb\"");
    }
  });
  // Framework-dependent defaults first; explicit keys below override them.
  s.regions = default_regions(s.framework);
  s.aod_offset_deg = default_aod_offset_deg(s.framework);
  c.schemes = default_schemes(s.framework);

  maybe(j, "num_antennas", [&](const json& v) {
    s.num_antennas = static_cast<int>(get_integer(v, "num_antennas", 2, 1 << 20));
  });
  maybe(j, "carrier_hz", [&](const json& v) {
    s.carrier_hz = get_number(v, "carrier_hz");
    if (!(s.carrier_hz > 0.0)) throw ConfigError("carrier_hz", "must be > 0");
  });
  maybe(j, "noise_dbm", [&](const json& v) { c.noise_dbm = get_number(v, "noise_dbm"); });
  maybe(j, "pmax_dbm", [&](const json& v) { c.pmax_dbm = get_number(v, "pmax_dbm"); });
  maybe(j, "matching_eta_dbm", [&](const json& v) {
    if (!v.is_null()) c.matching_eta_dbm = get_number(v, "matching_eta_dbm");
  });
  maybe(j, "rate_h_min_bps_hz", [&](const json& v) { s.rate_h_min = get_number(v, "rate_h_min_bps_hz"); });
  maybe(j, "rate_l_min_bps_hz", [&](const json& v) { s.rate_l_min = get_number(v, "rate_l_min_bps_hz"); });
  maybe(j, "clusters", [&](const json& v) { s.regions = parse_clusters(v, "clusters"); });
  maybe(j, "num_rf_chains", [&](const json& v) {
    const auto n = static_cast<std::size_t>(get_integer(v, "num_rf_chains", 1, 1 << 16));
    if (j.contains("clusters")) {
      if (n != s.regions.size()) throw ConfigError("num_rf_chains", "does not match the number of clusters");
    } else if (n > s.regions.size()) {
      throw ConfigError("num_rf_chains", "exceeds the default cluster layout; list the clusters explicitly");
    } else {
      s.regions.resize(n);
    }
  });
  maybe(j, "aod_offset_deg", [&](const json& v) { s.aod_offset_deg = get_number(v, "aod_offset_deg"); });
  maybe(j, "min_antenna_fraction", [&](const json& v) {
    s.min_antenna_fraction = get_number(v, "min_antenna_fraction");
  });
  maybe(j, "h_user", [&](const json& v) {
    const std::string r = get_string(v, "h_user");
    if (r == "farther") {
      s.h_user = HUserRule::kFarther;
    } else if (r == "nearer") {
      s.h_user = HUserRule::kNearer;
    } else {
      throw ConfigError("h_user", "expected \"farther\" or \"nearer\"");
    }
  });
  maybe(j, "svd_convention", [&](const json& v) {
    const std::string r = get_string(v, "svd_convention");
    if (r == "transpose") {
      s.svd = SvdConvention::kTranspose;
    } else if (r == "conjugate") {
      s.svd = SvdConvention::kConjugate;
    } else {
      throw ConfigError("svd_convention", "expected \"transpose\" or \"conjugate\"");
    }
  });
  maybe(j, "solver", [&](const json& v) { s.solver = parse_solver(v, "solver"); });
  maybe(j, "sweep", [&](const json& v) { c.sweep = parse_sweep(v, "sweep"); });
  maybe(j, "schemes", [&](const json& v) {
    if (!v.is_array() || v.empty()) throw ConfigError("schemes", "expected a non-empty array");
    c.schemes.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto scheme = parse_scheme(get_string(v[i], index("schemes", i)));
      if (!scheme) throw ConfigError(index("schemes", i), "unknown scheme");
      c.schemes.push_back(*scheme);
    }
  });
  maybe(j, "output_dir", [&](const json& v) {
    c.output_dir = get_string(v, "output_dir");
    if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  });
  maybe(j, "trials", [&](const json& v) { c.trials = static_cast<int>(get_integer(v, "trials", 1, 1'000'000)); });
  maybe(j, "threads", [&](const json& v) { c.threads = static_cast<int>(get_integer(v, "threads", 1, 1024)); });
  maybe(j, "seed", [&](const json& v) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  });

  // Physical ranges. dBm values are converted to watts exactly once, here.
  if (c.noise_dbm < -250.0 || c.noise_dbm > 100.0) throw ConfigError("noise_dbm", "must lie in [-250, 100]");
  if (c.pmax_dbm < -100.0 || c.pmax_dbm > 100.0) throw ConfigError("pmax_dbm", "must lie in [-100, 100]");
  if (c.matching_eta_dbm && (*c.matching_eta_dbm < -250.0 || *c.matching_eta_dbm > 250.0)) {
    throw ConfigError("matching_eta_dbm", "must lie in [-250, 250]");
  }
  s.noise_w = dbm_to_watts(c.noise_dbm);
  s.pmax_w = dbm_to_watts(c.pmax_dbm);
  s.eta_w = c.matching_eta_dbm ? dbm_to_watts(*c.matching_eta_dbm) : 0.0;

  for (std::size_t i = 0; i < c.sweep.values.size(); ++i) {
    const double v = c.sweep.values[i];
    const std::string at = index("sweep.values", i);
    switch (c.sweep.variable) {
      case SweepVariable::kPmaxDbm:
        if (v < -100.0 || v > 100.0) throw ConfigError(at, "pmax_dbm must lie in [-100, 100]");
        break;
      case SweepVariable::kNumAntennas:
        if (v != std::floor(v) || v < 2.0 || v > (1 << 20)) throw ConfigError(at, "antenna counts must be integers >= 2");
        break;
      case SweepVariable::kRateLMin:
        if (v < 0.0) throw ConfigError(at, "rates must be >= 0");
        break;
    }
  }
  try {
    s.validate();
    for (double v : c.sweep.values) apply_sweep(s, c.sweep.variable, v);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    if (colon == std::string::npos) throw ConfigError("<root>", what);
    throw ConfigError(what.substr(0, colon), what.substr(colon + 2));
  }
  for (Scheme scheme : c.schemes) {
    if (scheme == Scheme::kFfNomaOma && s.regions.size() != 4) {
      throw ConfigError("schemes", "ff_noma_oma needs exactly four clusters");
    }
  }
  return c;
}

json to_json(const RunConfig& c) {
  const ScenarioConfig& s = c.scenario;
  json j;
  j["framework"] = framework_name(s.framework);
  j["num_antennas"] = s.num_antennas;
  j["num_rf_chains"] = s.regions.size();
  j["carrier_hz"] = s.carrier_hz;
  j["noise_dbm"] = c.noise_dbm;
  j["pmax_dbm"] = c.pmax_dbm;
  j["matching_eta_dbm"] = c.matching_eta_dbm ? json(*c.matching_eta_dbm) : json(nullptr);
  j["rate_h_min_bps_hz"] = s.rate_h_min;
  j["rate_l_min_bps_hz"] = s.rate_l_min;
  json clusters = json::array();
  for (const auto& r : s.regions) {
    json cj;
    if (r.same_angle_as >= 0) {
      cj["same_angle_as"] = r.same_angle_as;
    } else {
      cj["angle_deg"] = {r.angle_deg.lo, r.angle_deg.hi};
    }
    cj["radius_m"] = {r.radius_m.lo, r.radius_m.hi};
    clusters.push_back(cj);
  }
  j["clusters"] = clusters;
  j["aod_offset_deg"] = s.aod_offset_deg;
  j["min_antenna_fraction"] = s.min_antenna_fraction;
  j["h_user"] = h_user_name(s.h_user);
  j["svd_convention"] = svd_name(s.svd);
  j["solver"] = {{"tolerance", s.solver.tolerance},
                 {"max_newton_steps", s.solver.max_newton_steps},
                 {"initial_barrier", s.solver.initial_barrier},
                 {"barrier_growth", s.solver.barrier_growth},
                 {"outer_tolerance", s.solver.outer_tolerance},
                 {"max_outer_iterations", s.solver.max_outer_iterations}};
  j["sweep"] = {{"variable", sweep_variable_name(c.sweep.variable)}, {"values", c.sweep.values}};
  json schemes = json::array();
  for (Scheme scheme : c.schemes) schemes.push_back(scheme_name(scheme));
  j["schemes"] = schemes;
  j["output_dir"] = c.output_dir;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

RunConfig parse_config(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  if (path == "-") return parse_config(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<document>", "cannot open " + path.string());
  return parse_config(in);
}

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace nfnoma
