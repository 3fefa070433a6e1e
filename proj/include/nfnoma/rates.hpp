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

#include <span>
#include <vector>

#include "nfnoma/analog.hpp"
#include "nfnoma/digital.hpp"

namespace nfnoma {

enum class Role : int { kH = 0, kL = 1 };

/// Users are stored cluster-major: index 2m is U(m,h), 2m+1 is U(m,l).
inline int user_index(int cluster, Role role) { return 2 * cluster + static_cast<int>(role); }

/// cross(i, u) = g_u^H W^A w_i^D: the gain of user u through cluster i's beam.
/// The diagonal blocks cross(m, 2m) and cross(m, 2m+1) are the effective channels.
struct EffectiveGains {
  CMatrix cross;

  int num_clusters() const { return static_cast<int>(cross.rows()); }
  Complex own(int cluster, Role role) const { return cross(cluster, user_index(cluster, role)); }
  double own_sq(int cluster, Role role) const { return std::norm(own(cluster, role)); }
  double cross_sq(int beam, int user) const { return std::norm(cross(beam, user)); }
};

/// Channels must be cluster-major (H then L) with one analog beam per cluster.
EffectiveGains effective_gains(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog,
                               const DigitalBeamformer& digital);

/// p = [p_1h, p_1l, ..., p_Mh, p_Ml] in watts.
struct PowerAllocation {
  Eigen::VectorXd p;

  PowerAllocation() = default;
  explicit PowerAllocation(Eigen::VectorXd values) : p(std::move(values)) {}
  static PowerAllocation uniform(int num_clusters, double total_w);

  int num_clusters() const { return static_cast<int>(p.size() / 2); }
  double at(int cluster, Role role) const { return p(user_index(cluster, role)); }
  double cluster_power(int cluster) const { return p(2 * cluster) + p(2 * cluster + 1); }
  double total() const { return p.sum(); }
};

struct ClusterRates {
  double h = 0.0;
  double l_to_h = 0.0;
  double l_to_l = 0.0;
  double l = 0.0;
  bool sic_ok = true;
};

struct RateReport {
  std::vector<ClusterRates> clusters;
  double sum_h = 0.0;
  double sum_l = 0.0;
};

/// Sum over i != m of P_i |g_{i,(m,k)}|^2.
double inter_cluster_interference(const PowerAllocation& p, const EffectiveGains& gains, int cluster, Role role);

double rate_h(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster);
double rate_l_to_h(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster);
double rate_l_to_l(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster);
/// min(rate_l_to_h, rate_l_to_l).
double rate_l(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster);

/// |g_mh|^2/(I_mh + s^2) >= |g_ml|^2/(I_ml + s^2).
bool sic_condition(const EffectiveGains& gains, const PowerAllocation& p, double noise_w, int cluster);

RateReport evaluate_rates(const PowerAllocation& p, const EffectiveGains& gains, double noise_w);

double sum_rate_h(const RateReport& report);

}  // namespace nfnoma
