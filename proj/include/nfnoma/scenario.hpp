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
#include <optional>
#include <string>
#include <vector>

#include "nfnoma/digital.hpp"
#include "nfnoma/geometry.hpp"
#include "nfnoma/matching.hpp"
#include "nfnoma/power.hpp"
#include "nfnoma/rng.hpp"
#include "nfnoma/solver.hpp"

namespace nfnoma {

enum class Framework { kSlb, kMlb };
enum class HUserRule { kFarther, kNearer };

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

struct ClusterRegion {
  Range angle_deg;
  Range radius_m;
  int same_angle_as = -1;  // reuse another cluster's drawn angles instead of drawing

  friend bool operator==(const ClusterRegion&, const ClusterRegion&) = default;
};

std::vector<ClusterRegion> default_regions(Framework framework);
double default_aod_offset_deg(Framework framework);

struct ScenarioConfig {
  Framework framework = Framework::kSlb;
  int num_antennas = 128;
  double carrier_hz = 30e9;
  double noise_w = 1e-12;
  double pmax_w = 1.0;
  double rate_h_min = 6.0;
  double rate_l_min = 0.5;
  std::vector<ClusterRegion> regions = default_regions(Framework::kSlb);
  double aod_offset_deg = 0.1;
  double min_antenna_fraction = 0.2;
  HUserRule h_user = HUserRule::kFarther;
  double eta_w = 0.0;  // matching leakage scale; <= 0 means P_max
  SvdConvention svd = SvdConvention::kTranspose;
  SolverOptions solver;

  int num_clusters() const { return static_cast<int>(regions.size()); }
  ArrayGeometry geometry() const { return ArrayGeometry::from_carrier(num_antennas, carrier_hz); }
  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct ClusterUsers {
  UserLocation h;
  UserLocation l;
};

std::vector<ClusterUsers> drop_scenario(const ScenarioConfig& config, Rng& rng);
std::vector<ClusterUsers> drop_slb_scenario(const ScenarioConfig& config, Rng& rng);
std::vector<ClusterUsers> drop_mlb_scenario(const ScenarioConfig& config, Rng& rng);

struct TrialResult {
  std::string scheme;
  bool feasible = false;
  std::string diagnostic;
  double sum_rate_h = 0.0;          // bit/s/Hz, time-averaged for OMA schemes
  double sum_rate_l = 0.0;
  std::vector<double> rate_h;       // per cluster
  std::vector<double> rate_l;
  double total_interference_w = 0.0;
  int sic_violations = 0;
  bool solver_converged = false;
  std::vector<AntennaSplit> splits;  // MLB-type schemes
  int matching_swaps = 0;
};

// Sum over users of received interference power: intra-cluster at both users (the H user's
// term counted before SIC) plus inter-cluster leakage.
double total_interference(const EffectiveGains& gains, const PowerAllocation& p);
double total_interference(const TrialResult& result);

TrialResult run_slb_pipeline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config);
TrialResult run_mlb_pipeline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config);
TrialResult run_fixed_mlb_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config);
TrialResult run_rand_mlb_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config, Rng& rng);
TrialResult run_mb_ff_noma_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config);
TrialResult run_nf_oma_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config, Rng& rng);
TrialResult run_ff_noma_oma_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config);

// Maximises sum_u w_u log2(1 + a_u p_u) over p >= floor, sum p <= budget with w_u in {0, 1}:
// weighted users water-fill, the rest sit at their floor. nullopt when the floors exceed the budget.
std::optional<std::vector<double>> water_fill(const std::vector<double>& snr_per_watt,
                                              const std::vector<double>& floor_w,
                                              const std::vector<bool>& weighted, double budget_w);

}  // namespace nfnoma
