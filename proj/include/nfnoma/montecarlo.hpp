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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nfnoma/scenario.hpp"

namespace nfnoma {

enum class Scheme { kSlbNfNoma, kNfOma, kFfNomaOma, kMlbNfNoma, kRandMlbNfNoma, kFixedMlbNfNoma, kMbFfNoma };

std::string scheme_name(Scheme scheme);
std::optional<Scheme> parse_scheme(const std::string& name);
std::vector<Scheme> default_schemes(Framework framework);

enum class SweepVariable { kPmaxDbm, kNumAntennas, kRateLMin };

std::string sweep_variable_name(SweepVariable v);
std::optional<SweepVariable> parse_sweep_variable(const std::string& name);

struct SweepSpec {
  SweepVariable variable = SweepVariable::kPmaxDbm;
  std::vector<double> values;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double w);

// Base config with the sweep variable set to `value`.
ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepVariable variable, double value);

struct MonteCarloOptions {
  int trials = 50;
  std::uint64_t seed = 1;
  int threads = 1;
};

TrialResult run_scheme(Scheme scheme, const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config,
                       Rng& rng);

struct CurveRow {
  std::string sweep_var;
  double value = 0.0;
  std::string scheme;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  int n_feasible = 0;
  int n_total = 0;
};

struct MonteCarloOutput {
  std::vector<CurveRow> rows;
  // results[sweep point][scheme][trial]
  std::vector<std::vector<std::vector<TrialResult>>> results;
};

inline const char* const kMetrics[] = {"sum_rate_h", "sum_rate_l", "total_interference_w"};

MonteCarloOutput monte_carlo(const ScenarioConfig& base, const SweepSpec& sweep, const std::vector<Scheme>& schemes,
                             const MonteCarloOptions& options);

struct SampleStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};
SampleStats sample_stats(const std::vector<double>& values);

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

}  // namespace nfnoma
