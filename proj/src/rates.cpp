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

#include "nfnoma/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfnoma {

EffectiveGains effective_gains(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog,
                               const DigitalBeamformer& digital) {
  if (channels.size() != 2 * analog.size()) {
    throw std::invalid_argument("effective_gains: expected two channels per analog beamformer");
  }
  if (digital.columns.rows() != static_cast<Eigen::Index>(analog.size()) ||
      digital.columns.cols() != static_cast<Eigen::Index>(analog.size())) {
    throw std::invalid_argument("effective_gains: digital beamformer must be M_RF x M_RF");
  }
  const CMatrix rows = beamspace_channels(channels, analog);  // 2M x M
  EffectiveGains out;
  out.cross = (rows * digital.columns).transpose();          // M x 2M
  return out;
}

PowerAllocation PowerAllocation::uniform(int num_clusters, double total_w) {
  return PowerAllocation(Eigen::VectorXd::Constant(2 * num_clusters, total_w / (2.0 * num_clusters)));
}

double inter_cluster_interference(const PowerAllocation& p, const EffectiveGains& gains, int cluster, Role role) {
  const int u = user_index(cluster, role);
  double sum = 0.0;
  for (int i = 0; i < gains.num_clusters(); ++i) {
    if (i != cluster) sum += p.cluster_power(i) * gains.cross_sq(i, u);
  }
  return sum;
}

namespace {

double log2_1p(double sinr) { return std::log2(1.0 + std::max(sinr, 0.0)); }

double sinr_l_to_h(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int m) {
  const double g = gains.own_sq(m, Role::kH);
  return p.at(m, Role::kL) * g / (p.at(m, Role::kH) * g + inter_cluster_interference(p, gains, m, Role::kH) + noise_w);
}

double sinr_l_to_l(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int m) {
  const double g = gains.own_sq(m, Role::kL);
  return p.at(m, Role::kL) * g / (p.at(m, Role::kH) * g + inter_cluster_interference(p, gains, m, Role::kL) + noise_w);
}

}  // namespace

double rate_h(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster) {
  const double sinr = p.at(cluster, Role::kH) * gains.own_sq(cluster, Role::kH) /
                      (inter_cluster_interference(p, gains, cluster, Role::kH) + noise_w);
  return log2_1p(sinr);
}

double rate_l_to_h(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster) {
  return log2_1p(sinr_l_to_h(p, gains, noise_w, cluster));
}

double rate_l_to_l(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster) {
  return log2_1p(sinr_l_to_l(p, gains, noise_w, cluster));
}

double rate_l(const PowerAllocation& p, const EffectiveGains& gains, double noise_w, int cluster) {
  return std::min(rate_l_to_h(p, gains, noise_w, cluster), rate_l_to_l(p, gains, noise_w, cluster));
}

bool sic_condition(const EffectiveGains& gains, const PowerAllocation& p, double noise_w, int cluster) {
  const double lhs = gains.own_sq(cluster, Role::kH) / (inter_cluster_interference(p, gains, cluster, Role::kH) + noise_w);
  const double rhs = gains.own_sq(cluster, Role::kL) / (inter_cluster_interference(p, gains, cluster, Role::kL) + noise_w);
  return lhs >= rhs;
}

RateReport evaluate_rates(const PowerAllocation& p, const EffectiveGains& gains, double noise_w) {
  if (p.num_clusters() != gains.num_clusters()) {
    throw std::invalid_argument("evaluate_rates: power vector and gains disagree on the cluster count");
  }
  RateReport report;
  report.clusters.resize(static_cast<std::size_t>(gains.num_clusters()));
  for (int m = 0; m < gains.num_clusters(); ++m) {
    auto& c = report.clusters[static_cast<std::size_t>(m)];
    c.h = rate_h(p, gains, noise_w, m);
    c.l_to_h = rate_l_to_h(p, gains, noise_w, m);
    c.l_to_l = rate_l_to_l(p, gains, noise_w, m);
    c.l = std::min(c.l_to_h, c.l_to_l);
    c.sic_ok = sic_condition(gains, p, noise_w, m);
    report.sum_l += c.l;
  }
  report.sum_h = sum_rate_h(report);
  return report;
}

double sum_rate_h(const RateReport& report) {
  double s = 0.0;
  for (const auto& c : report.clusters) s += c.h;
  return s;
}

}  // namespace nfnoma
