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

#include "nfnoma/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace nfnoma {

std::vector<ClusterRegion> default_regions(Framework framework) {
  if (framework == Framework::kSlb) {
    return {{{-40.0, -30.0}, {30.0, 50.0}, -1},
            {{-5.0, 5.0}, {35.0, 55.0}, -1},
            {{-5.0, 5.0}, {60.0, 80.0}, 1},
            {{30.0, 40.0}, {40.0, 60.0}, -1}};
  }
  return {{{-40.0, -30.0}, {30.0, 50.0}, -1},
          {{-15.0, -5.0}, {35.0, 55.0}, -1},
          {{5.0, 15.0}, {60.0, 80.0}, -1},
          {{30.0, 40.0}, {40.0, 60.0}, -1}};
}

double default_aod_offset_deg(Framework framework) { return framework == Framework::kSlb ? 0.1 : 1.0; }

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (num_antennas < 2) fail("num_antennas", "must be >= 2");
  if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) fail("carrier_hz", "must be a positive finite frequency");
  if (!(noise_w > 0.0) || !std::isfinite(noise_w)) fail("noise", "must be a positive finite power");
  if (!(pmax_w > 0.0) || !std::isfinite(pmax_w)) fail("pmax", "must be a positive finite power");
  if (!(rate_h_min >= 0.0) || !std::isfinite(rate_h_min)) fail("rate_h_min", "must be >= 0");
  if (!(rate_l_min >= 0.0) || !std::isfinite(rate_l_min)) fail("rate_l_min", "must be >= 0");
  if (regions.empty()) fail("clusters", "at least one cluster is required");
  if (!(aod_offset_deg >= 0.0) || aod_offset_deg >= 10.0) fail("aod_offset_deg", "must lie in [0, 10)");
  if (!(min_antenna_fraction > 0.0 && min_antenna_fraction <= 0.5)) fail("min_antenna_fraction", "must lie in (0, 0.5]");
  if (framework == Framework::kMlb && 2 * static_cast<int>(std::ceil(min_antenna_fraction * num_antennas - 1e-9)) > num_antennas) {
    fail("min_antenna_fraction", "leaves no valid antenna split");
  }
  if (static_cast<int>(regions.size()) > num_antennas) fail("clusters", "more clusters than antennas");
  for (std::size_t m = 0; m < regions.size(); ++m) {
    const auto& r = regions[m];
    const std::string at = "clusters[" + std::to_string(m) + "]";
    if (r.same_angle_as >= 0) {
      if (r.same_angle_as >= static_cast<int>(m) || regions[static_cast<std::size_t>(r.same_angle_as)].same_angle_as >= 0) {
        fail(at + ".same_angle_as", "must name an earlier cluster that draws its own angle");
      }
    } else {
      if (!(r.angle_deg.lo <= r.angle_deg.hi)) fail(at + ".angle_deg", "lower bound exceeds upper bound");
      if (!(r.angle_deg.lo >= -60.0) || !(r.angle_deg.hi + aod_offset_deg <= 60.0)) {
        fail(at + ".angle_deg", "user angles must stay within [-60, 60] degrees");
      }
    }
    if (!(r.radius_m.lo > 0.0) || !(r.radius_m.lo <= r.radius_m.hi) || !std::isfinite(r.radius_m.hi)) {
      fail(at + ".radius_m", "need 0 < lower <= upper");
    }
  }
  if (!(eta_w >= 0.0) || !std::isfinite(eta_w)) fail("eta_w", "must be >= 0 (0 selects P_max)");
  if (!(solver.tolerance > 0.0)) fail("solver.tolerance", "must be > 0");
  if (solver.max_outer_iterations < 1) fail("solver.max_outer_iterations", "must be >= 1");
}

std::vector<ClusterUsers> drop_scenario(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  std::vector<double> theta(config.regions.size());
  std::vector<ClusterUsers> out;
  for (std::size_t m = 0; m < config.regions.size(); ++m) {
    const auto& region = config.regions[m];
    theta[m] = region.same_angle_as >= 0 ? theta[static_cast<std::size_t>(region.same_angle_as)]
                                         : rng.uniform(region.angle_deg.lo, region.angle_deg.hi);
    const double ra = rng.uniform(region.radius_m.lo, region.radius_m.hi);
    const double rb = rng.uniform(region.radius_m.lo, region.radius_m.hi);
    const UserLocation a(ra, deg_to_rad(theta[m]));
    const UserLocation b(rb, deg_to_rad(theta[m] + config.aod_offset_deg));
    const bool a_is_h = config.h_user == HUserRule::kFarther ? ra >= rb : ra <= rb;
    out.push_back(a_is_h ? ClusterUsers{a, b} : ClusterUsers{b, a});
  }
  return out;
}

std::vector<ClusterUsers> drop_slb_scenario(const ScenarioConfig& config, Rng& rng) {
  ScenarioConfig c = config;
  c.regions = default_regions(Framework::kSlb);
  c.aod_offset_deg = default_aod_offset_deg(Framework::kSlb);
  return drop_scenario(c, rng);
}

std::vector<ClusterUsers> drop_mlb_scenario(const ScenarioConfig& config, Rng& rng) {
  ScenarioConfig c = config;
  c.regions = default_regions(Framework::kMlb);
  c.aod_offset_deg = default_aod_offset_deg(Framework::kMlb);
  return drop_scenario(c, rng);
}

double total_interference(const EffectiveGains& gains, const PowerAllocation& p) {
  double total = 0.0;
  for (int m = 0; m < gains.num_clusters(); ++m) {
    total += p.at(m, Role::kL) * gains.own_sq(m, Role::kH);
    total += p.at(m, Role::kH) * gains.own_sq(m, Role::kL);
    total += inter_cluster_interference(p, gains, m, Role::kH);
    total += inter_cluster_interference(p, gains, m, Role::kL);
  }
  return total;
}

double total_interference(const TrialResult& result) { return result.total_interference_w; }

std::optional<std::vector<double>> water_fill(const std::vector<double>& snr_per_watt,
                                              const std::vector<double>& floor_w,
                                              const std::vector<bool>& weighted, double budget_w) {
  const std::size_t n = snr_per_watt.size();
  if (floor_w.size() != n || weighted.size() != n) throw std::invalid_argument("water_fill: size mismatch");
  const double floors = std::accumulate(floor_w.begin(), floor_w.end(), 0.0);
  if (floors > budget_w) return std::nullopt;
  auto fill = [&](double mu) {
    std::vector<double> p(floor_w);
    for (std::size_t u = 0; u < n; ++u) {
      if (weighted[u]) p[u] = std::max(floor_w[u], mu - 1.0 / snr_per_watt[u]);
    }
    return p;
  };
  auto used = [&](double mu) {
    const auto p = fill(mu);
    return std::accumulate(p.begin(), p.end(), 0.0);
  };
  if (std::none_of(weighted.begin(), weighted.end(), [](bool w) { return w; })) return floor_w;
  double lo = 0.0;
  double hi = budget_w;
  for (std::size_t u = 0; u < n; ++u) {
    if (weighted[u]) hi = std::max(hi, budget_w + 1.0 / snr_per_watt[u] + floor_w[u]);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (used(mid) > budget_w ? hi : lo) = mid;
  }
  return fill(lo);
}

namespace {

std::vector<ChannelVector> user_channels(const std::vector<ClusterUsers>& clusters, const ArrayGeometry& geom) {
  std::vector<ChannelVector> out;
  for (const auto& c : clusters) {
    out.push_back(channel(geom, c.h));
    out.push_back(channel(geom, c.l));
  }
  return out;
}

void check_clusters(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config) {
  config.validate();
  if (static_cast<int>(clusters.size()) != config.num_clusters()) {
    throw std::invalid_argument("pipeline: drop has " + std::to_string(clusters.size()) + " clusters, config has " +
                                std::to_string(config.num_clusters()));
  }
}

void fill_rates(TrialResult& r, const EffectiveGains& gains, const PowerAllocation& p, double noise_w) {
  const RateReport report = evaluate_rates(p, gains, noise_w);
  r.rate_h.clear();
  r.rate_l.clear();
  for (const auto& c : report.clusters) {
    r.rate_h.push_back(c.h);
    r.rate_l.push_back(c.l);
    if (!c.sic_ok) ++r.sic_violations;
  }
  r.sum_rate_h = report.sum_h;
  r.sum_rate_l = report.sum_l;
  r.total_interference_w = total_interference(gains, p);
}

PowerProblem make_problem(const EffectiveGains& gains, const ScenarioConfig& config) {
  PowerProblem pr;
  pr.gains = gains;
  pr.qos = QosThresholds::uniform(gains.num_clusters(), config.rate_h_min, config.rate_l_min);
  pr.pmax_w = config.pmax_w;
  pr.noise_w = config.noise_w;
  return pr;
}

// Runs `body`, turning the expected numerical failure modes into an infeasible trial.
TrialResult guarded(const std::string& scheme, const std::function<void(TrialResult&)>& body) {
  TrialResult r;
  r.scheme = scheme;
  try {
    body(r);
  } catch (const InfeasibleError& e) {
    r.feasible = false;
    r.diagnostic = e.what();
  } catch (const IllConditionedError& e) {
    r.feasible = false;
    r.diagnostic = e.what();
  }
  return r;
}

using Chooser = std::function<std::vector<int>(const MatchingEvaluator&, TrialResult&)>;

TrialResult run_split_pipeline(const std::string& scheme, const std::vector<ClusterUsers>& clusters,
                               const ScenarioConfig& config, const BeamBuilder& beam, const Chooser& choose) {
  check_clusters(clusters, config);
  return guarded(scheme, [&](TrialResult& r) {
    const ArrayGeometry geom = config.geometry();
    const int mrf = config.num_clusters();
    MatchingContext ctx;
    ctx.channels = user_channels(clusters, geom);
    ctx.strategies = strategy_set(config.num_antennas, min_antennas_for(config.num_antennas, config.min_antenna_fraction));
    ctx.beam = beam;
    const SvdConvention conv = config.svd;
    ctx.digital = [conv](std::span<const ChannelVector> ch, std::span<const AnalogBeamformer> an) {
      return svd_zf_design(ch, an, conv);
    };
    ctx.power = PowerAllocation::uniform(mrf, config.pmax_w);
    ctx.noise_w = config.noise_w;
    ctx.eta.assign(static_cast<std::size_t>(mrf), config.eta_w > 0.0 ? config.eta_w : config.pmax_w);
    const MatchingEvaluator ev(ctx);
    const std::vector<int> assignment = choose(ev, r);
    for (int q : assignment) r.splits.push_back(ctx.strategies[q]);

    const auto analog = ev.beams(assignment);
    const DigitalBeamformer digital = svd_zf_design(ctx.channels, analog, conv);
    const EffectiveGains gains = effective_gains(ctx.channels, analog, digital);
    const PowerSolution sol = solve_mlb(make_problem(gains, config), config.solver);
    r.feasible = true;
    r.solver_converged = sol.converged;
    r.diagnostic = sol.diagnostic;
    fill_rates(r, gains, sol.p, config.noise_w);
  });
}

std::vector<int> matched(const MatchingEvaluator& ev, TrialResult& r) {
  const MatchingResult m = allocate_antennas(ev);
  r.matching_swaps = m.swaps;
  if (m.capped) r.diagnostic = m.warning;
  return m.state.assignment();
}

BeamBuilder nf_split_beam(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config) {
  const ArrayGeometry geom = config.geometry();
  const int n_min = min_antennas_for(config.num_antennas, config.min_antenna_fraction);
  return [geom, n_min, &clusters](int m, const AntennaSplit& split) {
    const auto& c = clusters[static_cast<std::size_t>(m)];
    return mlb_beamformer(geom, split, c.h, c.l, n_min);
  };
}

}  // namespace

TrialResult run_slb_pipeline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config) {
  check_clusters(clusters, config);
  return guarded("slb_nf_noma", [&](TrialResult& r) {
    const ArrayGeometry geom = config.geometry();
    const auto channels = user_channels(clusters, geom);
    std::vector<AnalogBeamformer> analog;
    for (const auto& c : clusters) analog.push_back(slb_beamformer(geom, c.h));
    const DigitalBeamformer digital = zf_design(channels, analog);
    const EffectiveGains gains = effective_gains(channels, analog, digital);
    const PowerSolution sol = solve_slb(make_problem(gains, config), config.solver);
    r.feasible = true;
    r.solver_converged = sol.converged;
    r.diagnostic = sol.diagnostic;
    fill_rates(r, gains, sol.p, config.noise_w);
  });
}

TrialResult run_mlb_pipeline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config) {
  return run_split_pipeline("mlb_nf_noma", clusters, config, nf_split_beam(clusters, config), matched);
}

TrialResult run_fixed_mlb_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config) {
  return run_split_pipeline("fixed_mlb_nf_noma", clusters, config, nf_split_beam(clusters, config),
                            [](const MatchingEvaluator& ev, TrialResult&) {
                              // Strategy 0 is (N - N_min, N_min): the minimum goes to the L user.
                              return std::vector<int>(static_cast<std::size_t>(ev.context().num_clusters()), 0);
                            });
}

TrialResult run_rand_mlb_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config, Rng& rng) {
  return run_split_pipeline("rand_mlb_nf_noma", clusters, config, nf_split_beam(clusters, config),
                            [&rng](const MatchingEvaluator& ev, TrialResult&) {
                              std::vector<int> a;
                              const auto count = static_cast<std::uint64_t>(ev.context().strategies.size());
                              for (int m = 0; m < ev.context().num_clusters(); ++m) {
                                a.push_back(static_cast<int>(rng.below(count)));
                              }
                              return a;
                            });
}

TrialResult run_mb_ff_noma_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config) {
  const ArrayGeometry geom = config.geometry();
  const int n_min = min_antennas_for(config.num_antennas, config.min_antenna_fraction);
  const BeamBuilder beam = [geom, n_min, &clusters](int m, const AntennaSplit& split) {
    const auto& c = clusters[static_cast<std::size_t>(m)];
    return mb_ff_beamformer(geom, split, c.h.angle(), c.l.angle(), n_min);
  };
  return run_split_pipeline("mb_ff_noma", clusters, config, beam, matched);
}

TrialResult run_nf_oma_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config, Rng& rng) {
  check_clusters(clusters, config);
  return guarded("nf_oma", [&](TrialResult& r) {
    const ArrayGeometry geom = config.geometry();
    const int mrf = config.num_clusters();
    const auto channels = user_channels(clusters, geom);
    // Random schedule: Fisher-Yates over the 2M users, first M in slot 0.
    std::vector<int> order(static_cast<std::size_t>(2 * mrf));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    r.rate_h.assign(static_cast<std::size_t>(mrf), 0.0);
    r.rate_l.assign(static_cast<std::size_t>(mrf), 0.0);
    const double sinr_h = sinr_threshold(config.rate_h_min);
    const double sinr_l = sinr_threshold(config.rate_l_min);
    for (int slot = 0; slot < 2; ++slot) {
      std::vector<ChannelVector> ch;
      std::vector<AnalogBeamformer> analog;
      std::vector<int> users(order.begin() + slot * mrf, order.begin() + (slot + 1) * mrf);
      for (int u : users) {
        ch.push_back(channels[static_cast<std::size_t>(u)]);
        const auto& c = clusters[static_cast<std::size_t>(u / 2)];
        analog.push_back(slb_beamformer(geom, u % 2 == 0 ? c.h : c.l));
      }
      const CMatrix cols = beamspace_channels(ch, analog).adjoint();
      const DigitalBeamformer digital = zf_digital(cols);
      const CMatrix eff = (beamspace_channels(ch, analog) * digital.columns);  // user x beam
      std::vector<double> snr(users.size()), floor(users.size());
      std::vector<bool> weighted(users.size());
      for (std::size_t k = 0; k < users.size(); ++k) {
        snr[k] = std::norm(eff(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))) / config.noise_w;
        const bool is_h = users[k] % 2 == 0;
        floor[k] = (is_h ? sinr_h : sinr_l) / snr[k];
        weighted[k] = is_h;
      }
      const auto p = water_fill(snr, floor, weighted, config.pmax_w);
      if (!p) {
        throw InfeasibleError("nf_oma: QoS floors in slot " + std::to_string(slot) + " exceed P_max", 0.0,
                              "budget[slot " + std::to_string(slot) + "]");
      }
      for (std::size_t k = 0; k < users.size(); ++k) {
        const double rate = 0.5 * std::log2(1.0 + (*p)[k] * snr[k]);
        const auto m = static_cast<std::size_t>(users[k] / 2);
        (users[k] % 2 == 0 ? r.rate_h : r.rate_l)[m] = rate;
        for (std::size_t i = 0; i < users.size(); ++i) {
          if (i != k) {
            r.total_interference_w +=
                0.5 * (*p)[i] * std::norm(eff(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
          }
        }
      }
    }
    r.sum_rate_h = std::accumulate(r.rate_h.begin(), r.rate_h.end(), 0.0);
    r.sum_rate_l = std::accumulate(r.rate_l.begin(), r.rate_l.end(), 0.0);
    r.feasible = true;
    r.solver_converged = true;
  });
}

TrialResult run_ff_noma_oma_baseline(const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config) {
  check_clusters(clusters, config);
  if (config.num_clusters() != 4) {
    throw std::invalid_argument("ff_noma_oma: the slot schedule is defined for exactly four clusters");
  }
  return guarded("ff_noma_oma", [&](TrialResult& r) {
    const ArrayGeometry geom = config.geometry();
    const int slots[2][3] = {{0, 1, 3}, {0, 2, 3}};
    r.rate_h.assign(4, 0.0);
    r.rate_l.assign(4, 0.0);
    r.solver_converged = true;
    for (const auto& slot : slots) {
      std::vector<ClusterUsers> sub;
      for (int m : slot) sub.push_back(clusters[static_cast<std::size_t>(m)]);
      const auto channels = user_channels(sub, geom);
      std::vector<AnalogBeamformer> analog;
      for (const auto& c : sub) analog.push_back(ff_beamformer(geom, c.h.angle()));
      const DigitalBeamformer digital = zf_design(channels, analog);
      const EffectiveGains gains = effective_gains(channels, analog, digital);
      const PowerSolution sol = solve_slb(make_problem(gains, config), config.solver);
      r.solver_converged = r.solver_converged && sol.converged;
      if (!sol.diagnostic.empty()) r.diagnostic = sol.diagnostic;
      const RateReport report = evaluate_rates(sol.p, gains, config.noise_w);
      for (std::size_t k = 0; k < 3; ++k) {
        const auto m = static_cast<std::size_t>(slot[k]);
        r.rate_h[m] += 0.5 * report.clusters[k].h;
        r.rate_l[m] += 0.5 * report.clusters[k].l;
        if (!report.clusters[k].sic_ok) ++r.sic_violations;
      }
      r.total_interference_w += 0.5 * total_interference(gains, sol.p);
    }
    r.sum_rate_h = std::accumulate(r.rate_h.begin(), r.rate_h.end(), 0.0);
    r.sum_rate_l = std::accumulate(r.rate_l.begin(), r.rate_l.end(), 0.0);
    r.feasible = true;
  });
}

}  // namespace nfnoma
