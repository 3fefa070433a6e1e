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

#include <cmath>
#include <numeric>
#include <sstream>

#include "nfnoma/montecarlo.hpp"
#include "nfnoma/scenario.hpp"
#include "test_support.hpp"

using namespace nfnoma;

namespace {

constexpr double kQosSlack = 1e-6;
constexpr double kSlbFixtureSumRate = 44.626240862;
constexpr double kMlbFixtureSumRate = 46.9184822782;

ScenarioConfig slb_config(int n = 128, double pmax_dbm = 30.0) {
  ScenarioConfig c;
  c.num_antennas = n;
  c.noise_w = dbm_to_watts(-90.0);
  c.pmax_w = dbm_to_watts(pmax_dbm);
  return c;
}

ScenarioConfig mlb_config(int n = 128, double pmax_dbm = 30.0) {
  ScenarioConfig c = slb_config(n, pmax_dbm);
  c.framework = Framework::kMlb;
  c.regions = default_regions(Framework::kMlb);
  c.aod_offset_deg = default_aod_offset_deg(Framework::kMlb);
  return c;
}

ScenarioConfig fixture_config(int mrf, int n, double pmax_dbm) {
  ScenarioConfig c = slb_config(n, pmax_dbm);
  c.regions.resize(static_cast<std::size_t>(mrf));
  for (auto& r : c.regions) r = ClusterRegion{{-60.0, 59.0}, {1.0, 200.0}, -1};
  return c;
}

ClusterUsers users(double rh, double th_deg, double rl, double tl_deg) {
  return {UserLocation(rh, deg_to_rad(th_deg)), UserLocation(rl, deg_to_rad(tl_deg))};
}

void check_qos(const TrialResult& r, const ScenarioConfig& c) {
  REQUIRE(r.feasible);
  for (std::size_t m = 0; m < r.rate_h.size(); ++m) {
    CHECK(r.rate_h[m] >= c.rate_h_min - kQosSlack);
    CHECK(r.rate_l[m] >= c.rate_l_min - kQosSlack);
  }
  CHECK(r.sum_rate_h == doctest::Approx(std::accumulate(r.rate_h.begin(), r.rate_h.end(), 0.0)));
}

}  // namespace

TEST_CASE("seeded drops are reproducible") {
  const ScenarioConfig c = slb_config();
  Rng a(42, 7, 0);
  Rng b(42, 7, 0);
  const auto d1 = drop_slb_scenario(c, a);
  const auto d2 = drop_slb_scenario(c, b);
  REQUIRE(d1.size() == 4);
  for (std::size_t m = 0; m < d1.size(); ++m) {
    CHECK(d1[m].h == d2[m].h);
    CHECK(d1[m].l == d2[m].l);
  }
  Rng other(42, 8, 0);
  CHECK_FALSE(drop_slb_scenario(c, other)[0].h == d1[0].h);
}

TEST_CASE("SLB drops stay inside their regions") {
  const ScenarioConfig c = slb_config();
  const double angle[4][2] = {{-40, -30}, {-5, 5}, {-5, 5}, {30, 40}};
  const double radius[4][2] = {{30, 50}, {35, 55}, {60, 80}, {40, 60}};
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Rng rng(1, t, 0);
    const auto d = drop_slb_scenario(c, rng);
    for (std::size_t m = 0; m < 4; ++m) {
      const double lo = std::min(d[m].h.angle(), d[m].l.angle());
      const double hi = std::max(d[m].h.angle(), d[m].l.angle());
      CHECK(rad_to_deg(lo) >= angle[m][0] - 1e-12);
      CHECK(rad_to_deg(lo) <= angle[m][1] + 1e-12);
      CHECK(rad_to_deg(hi - lo) == doctest::Approx(0.1).epsilon(1e-9));
      for (const auto& u : {d[m].h, d[m].l}) {
        CHECK(u.radius() >= radius[m][0]);
        CHECK(u.radius() <= radius[m][1]);
      }
      CHECK(d[m].h.radius() >= d[m].l.radius());
    }
    // The third cluster reuses the second cluster's angle.
    CHECK(std::min(d[2].h.angle(), d[2].l.angle()) == std::min(d[1].h.angle(), d[1].l.angle()));
  }
}

TEST_CASE("MLB drops use their own sectors and a one degree offset") {
  const ScenarioConfig c = mlb_config();
  const double angle[4][2] = {{-40, -30}, {-15, -5}, {5, 15}, {30, 40}};
  const double radius[4][2] = {{30, 50}, {35, 55}, {60, 80}, {40, 60}};
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Rng rng(2, t, 0);
    const auto d = drop_mlb_scenario(c, rng);
    for (std::size_t m = 0; m < 4; ++m) {
      const double lo = rad_to_deg(std::min(d[m].h.angle(), d[m].l.angle()));
      const double hi = rad_to_deg(std::max(d[m].h.angle(), d[m].l.angle()));
      CHECK(lo >= angle[m][0] - 1e-12);
      CHECK(lo <= angle[m][1] + 1e-12);
      CHECK(hi - lo == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(d[m].h.radius() >= radius[m][0]);
      CHECK(d[m].l.radius() <= radius[m][1]);
    }
  }
}

TEST_CASE("H user rule is switchable") {
  ScenarioConfig c = slb_config();
  c.h_user = HUserRule::kNearer;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(3, t, 0);
    for (const auto& cl : drop_scenario(c, rng)) CHECK(cl.h.radius() <= cl.l.radius());
  }
}

TEST_CASE("config validation names the field") {
  ScenarioConfig c = slb_config();
  c.regions[0].angle_deg = {-70.0, -30.0};
  try {
    c.validate();
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).rfind("clusters[0].angle_deg", 0) == 0);
  }
  c = slb_config();
  c.regions[2].same_angle_as = 3;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("clusters[2].same_angle_as"), std::invalid_argument);
  c = slb_config();
  c.pmax_w = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("water filling matches its optimality conditions") {
  auto rng = testing::make_rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<double> a, floor;
    std::vector<bool> w;
    for (int u = 0; u < n; ++u) {
      a.push_back(testing::uniform(rng, 0.5, 50.0));
      floor.push_back(testing::uniform(rng, 0.0, 0.1));
      w.push_back(u % 2 == 0 || trial % 3 == 0);
    }
    const double budget = testing::uniform(rng, 0.6, 3.0);
    const auto p = water_fill(a, floor, w, budget);
    REQUIRE(p.has_value());
    const double used = std::accumulate(p->begin(), p->end(), 0.0);
    CHECK(used == doctest::Approx(budget).epsilon(1e-12));
    // Common water level over the active weighted users; inactive ones sit at or above it.
    double level = -1.0;
    for (int u = 0; u < n; ++u) {
      CHECK((*p)[u] >= floor[u]);
      if (!w[u]) {
        CHECK((*p)[u] == floor[u]);
      } else if ((*p)[u] > floor[u] + 1e-12) {
        const double l = (*p)[u] + 1.0 / a[u];
        if (level < 0.0) level = l;
        CHECK(l == doctest::Approx(level).epsilon(1e-9));
      }
    }
    for (int u = 0; u < n; ++u) {
      if (w[u] && (*p)[u] <= floor[u] + 1e-12 && level > 0.0) CHECK(floor[u] + 1.0 / a[u] >= level - 1e-9);
    }
  }
  CHECK_FALSE(water_fill({1.0, 1.0}, {0.6, 0.6}, {true, true}, 1.0).has_value());
}

TEST_CASE("water filling agrees with a grid search on two users") {
  const std::vector<double> a{4.0, 0.7};
  const std::vector<double> floor{0.05, 0.1};
  const double budget = 1.0;
  const auto p = water_fill(a, floor, {true, true}, budget);
  REQUIRE(p.has_value());
  double best = -1.0;
  for (int i = 0; i <= 100000; ++i) {
    const double p0 = floor[0] + (budget - floor[0] - floor[1]) * i / 100000.0;
    const double p1 = budget - p0;
    best = std::max(best, std::log2(1 + a[0] * p0) + std::log2(1 + a[1] * p1));
  }
  const double got = std::log2(1 + a[0] * (*p)[0]) + std::log2(1 + a[1] * (*p)[1]);
  CHECK(got >= best - 1e-9);
}

TEST_CASE("total interference adds up the received interference terms") {
  auto rng = testing::make_rng(23);
  const EffectiveGains g = testing::random_gains(rng, 3, 100.0, 0.1, false);
  Eigen::VectorXd pv(6);
  pv << 0.1, 0.2, 0.05, 0.3, 0.15, 0.2;
  const PowerAllocation p(pv);
  double expected = 0.0;
  for (int u = 0; u < 6; ++u) {
    const int m = u / 2;
    const int partner = u % 2 == 0 ? u + 1 : u - 1;
    expected += pv(partner) * std::norm(g.cross(m, u));
    for (int i = 0; i < 3; ++i) {
      if (i != m) expected += (pv(2 * i) + pv(2 * i + 1)) * std::norm(g.cross(i, u));
    }
  }
  CHECK(total_interference(g, p) == doctest::Approx(expected).epsilon(1e-14));

  // Additive over clusters that do not see each other.
  EffectiveGains block = g;
  block.cross.block(0, 2, 1, 4).setZero();
  block.cross.block(1, 0, 2, 2).setZero();
  EffectiveGains first;
  first.cross = g.cross.block(0, 0, 1, 2);
  EffectiveGains rest;
  rest.cross = block.cross.block(1, 2, 2, 4);
  const double parts = total_interference(first, PowerAllocation(pv.head(2))) +
                       total_interference(rest, PowerAllocation(pv.tail(4)));
  CHECK(total_interference(block, p) == doctest::Approx(parts).epsilon(1e-14));
}

TEST_CASE("single-cluster OMA: closed-form rates, halving and no interference") {
  ScenarioConfig c = fixture_config(1, 64, 20.0);
  const std::vector<ClusterUsers> drop{users(40.0, 10.0, 20.0, 10.5)};
  Rng rng(1, 0, 1);
  const TrialResult r = run_nf_oma_baseline(drop, c, rng);
  REQUIRE(r.feasible);
  const ArrayGeometry g = c.geometry();
  // One user per slot: the focused beam reaches N a^2, the H user takes the whole budget and
  // the L user sits at its QoS floor.
  const double a = path_loss(40.0, g.wavelength);
  const double snr = c.pmax_w * 64 * a * a / c.noise_w;
  CHECK(r.rate_h[0] == doctest::Approx(0.5 * std::log2(1.0 + snr)).epsilon(1e-9));
  CHECK(r.rate_l[0] == doctest::Approx(0.5 * c.rate_l_min).epsilon(1e-9));
  CHECK(r.total_interference_w == 0.0);
}

TEST_CASE("FF-NOMA-OMA keeps the shared-angle clusters in separate slots") {
  ScenarioConfig c = slb_config(256, 30.0);
  Rng rng(5, 0, 0);
  const auto drop = drop_slb_scenario(c, rng);
  const TrialResult r = run_ff_noma_oma_baseline(drop, c);
  REQUIRE(r.feasible);
  const ArrayGeometry geom = c.geometry();
  double rate_h[4] = {0, 0, 0, 0};
  double interference = 0.0;
  for (const auto& slot : {std::vector<int>{0, 1, 3}, std::vector<int>{0, 2, 3}}) {
    std::vector<ChannelVector> ch;
    std::vector<AnalogBeamformer> analog;
    for (int m : slot) {
      ch.push_back(channel(geom, drop[static_cast<std::size_t>(m)].h));
      ch.push_back(channel(geom, drop[static_cast<std::size_t>(m)].l));
      analog.push_back(ff_beamformer(geom, drop[static_cast<std::size_t>(m)].h.angle()));
    }
    const EffectiveGains gains = effective_gains(ch, analog, zf_design(ch, analog));
    PowerProblem pr;
    pr.gains = gains;
    pr.qos = QosThresholds::uniform(3, c.rate_h_min, c.rate_l_min);
    pr.pmax_w = c.pmax_w;
    pr.noise_w = c.noise_w;
    const PowerSolution sol = solve_slb(pr, c.solver);
    const RateReport rep = evaluate_rates(sol.p, gains, c.noise_w);
    for (std::size_t k = 0; k < 3; ++k) rate_h[slot[k]] += 0.5 * rep.clusters[k].h;
    interference += 0.5 * total_interference(gains, sol.p);
  }
  for (std::size_t m = 0; m < 4; ++m) CHECK(r.rate_h[m] == doctest::Approx(rate_h[m]).epsilon(1e-12));
  CHECK(r.total_interference_w == doctest::Approx(interference).epsilon(1e-12));
  // Clusters served in one slot only get half of an in-slot rate of at least R_min.
  CHECK(r.rate_h[1] >= 0.5 * c.rate_h_min - kQosSlack);
  CHECK(r.rate_h[0] >= c.rate_h_min - kQosSlack);
}

TEST_CASE("far-field beam ignores the radius") {
  const ArrayGeometry g = ArrayGeometry::from_carrier(64, 30e9);
  const ClusterUsers near = users(20.0, 12.0, 10.0, 13.0);
  const ClusterUsers far = users(70.0, 12.0, 10.0, 13.0);
  CHECK(ff_beamformer(g, near.h.angle()).weights() == ff_beamformer(g, far.h.angle()).weights());
  const AntennaSplit split{40, 24};
  CHECK(mb_ff_beamformer(g, split, near.h.angle(), near.l.angle()).weights() ==
        mb_ff_beamformer(g, split, far.h.angle(), far.l.angle()).weights());
}

TEST_CASE("SLB pipeline on the three-cluster map fixture") {
  // User pairs of the SLB gain-map illustration, 1024 antennas, farther user as H.
  ScenarioConfig c = fixture_config(3, 1024, 30.0);
  const std::vector<ClusterUsers> drop{users(60.0, -30.0, 30.0, -30.0), users(45.0, 40.0, 25.0, 40.0),
                                       users(80.0, 40.0, 60.0, 40.0)};
  const TrialResult r = run_slb_pipeline(drop, c);
  check_qos(r, c);
  CHECK(r.solver_converged);
  // H users see no inter-cluster leakage after ZF.
  const ArrayGeometry g = c.geometry();
  std::vector<ChannelVector> ch;
  std::vector<AnalogBeamformer> analog;
  for (const auto& cl : drop) {
    ch.push_back(channel(g, cl.h));
    ch.push_back(channel(g, cl.l));
    analog.push_back(slb_beamformer(g, cl.h));
  }
  const EffectiveGains gains = effective_gains(ch, analog, zf_design(ch, analog));
  for (int m = 0; m < 3; ++m) {
    for (int i = 0; i < 3; ++i) {
      if (i != m) CHECK(gains.cross_sq(i, user_index(m, Role::kH)) <= 1e-18 * gains.own_sq(m, Role::kH));
    }
  }
  // Frozen from the first run of this fixture.
  CHECK(r.sum_rate_h == doctest::Approx(kSlbFixtureSumRate).epsilon(1e-6));
}

TEST_CASE("MLB pipelines on the multi-focus map fixture") {
  ScenarioConfig c = fixture_config(3, 1024, 30.0);
  c.framework = Framework::kMlb;
  const std::vector<ClusterUsers> drop{users(25.0, -50.0, 35.0, -40.0), users(60.0, 5.0, 70.0, 15.0),
                                       users(40.0, 40.0, 50.0, 50.0)};
  const TrialResult matched = run_mlb_pipeline(drop, c);
  check_qos(matched, c);
  const int n_min = min_antennas_for(1024, 0.2);
  for (const auto& s : matched.splits) {
    CHECK(s.num_h + s.num_l == 1024);
    CHECK(std::min(s.num_h, s.num_l) >= n_min);
  }
  CHECK(matched.sum_rate_h == doctest::Approx(kMlbFixtureSumRate).epsilon(1e-6));

  const TrialResult fixed = run_fixed_mlb_baseline(drop, c);
  check_qos(fixed, c);
  for (const auto& s : fixed.splits) CHECK(s == AntennaSplit{1024 - n_min, n_min});

  Rng rng(9, 0, 5);
  const TrialResult rand = run_rand_mlb_baseline(drop, c, rng);
  for (const auto& s : rand.splits) CHECK(std::min(s.num_h, s.num_l) >= n_min);

  const TrialResult mb = run_mb_ff_noma_baseline(drop, c);
  if (mb.feasible) check_qos(mb, c);
}

TEST_CASE("SIC order holds in feasible SLB trials at the default geometry") {
  const ScenarioConfig c = slb_config(512, 30.0);
  int feasible = 0;
  int violations = 0;
  for (std::uint64_t t = 0; t < 40; ++t) {
    Rng rng(12, t, 0);
    const TrialResult r = run_slb_pipeline(drop_slb_scenario(c, rng), c);
    if (!r.feasible) continue;
    check_qos(r, c);
    ++feasible;
    violations += r.sic_violations > 0 ? 1 : 0;
  }
  MESSAGE("feasible " << feasible << " of 40, trials with a SIC violation: " << violations);
  REQUIRE(feasible > 0);
  CHECK(violations <= 0.01 * feasible);
}

TEST_CASE("monte carlo is deterministic and independent of the thread count") {
  ScenarioConfig c = slb_config(64, 30.0);
  const SweepSpec sweep{SweepVariable::kPmaxDbm, {20.0, 30.0}};
  const std::vector<Scheme> schemes{Scheme::kSlbNfNoma, Scheme::kFfNomaOma, Scheme::kNfOma};
  const auto one = monte_carlo(c, sweep, schemes, {6, 77, 1});
  const auto three = monte_carlo(c, sweep, schemes, {6, 77, 3});
  REQUIRE(one.rows.size() == 2 * 3 * 3);
  std::ostringstream a, b;
  write_curve_csv(a, one.rows);
  write_curve_csv(b, three.rows);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("sweep_var,value,scheme,metric,mean,stderr,n_feasible,n_total\n", 0) == 0);
  for (const auto& row : one.rows) CHECK(row.n_total == 6);
  const auto other_seed = monte_carlo(c, sweep, schemes, {6, 78, 1});
  std::ostringstream d;
  write_curve_csv(d, other_seed.rows);
  CHECK(d.str() != a.str());
}

TEST_CASE("sample statistics") {
  const SampleStats s = sample_stats({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(s.n == 4);
  CHECK(std::isnan(sample_stats({}).mean));
  CHECK(sample_stats({7.0}).stderr_ == 0.0);

  // Standard error shrinks like 1/sqrt(n) for i.i.d. samples.
  Rng rng(4);
  std::vector<double> small, large;
  for (int i = 0; i < 400; ++i) small.push_back(rng.uniform01());
  for (int i = 0; i < 6400; ++i) large.push_back(rng.uniform01());
  const double ratio = sample_stats(small).stderr_ / sample_stats(large).stderr_;
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("sweep application") {
  const ScenarioConfig c = slb_config();
  CHECK(apply_sweep(c, SweepVariable::kPmaxDbm, 20.0).pmax_w == doctest::Approx(0.1));
  CHECK(apply_sweep(c, SweepVariable::kNumAntennas, 256.0).num_antennas == 256);
  CHECK(apply_sweep(c, SweepVariable::kRateLMin, 1.5).rate_l_min == 1.5);
  CHECK_THROWS_AS(apply_sweep(c, SweepVariable::kNumAntennas, 12.5), std::invalid_argument);
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(watts_to_dbm(1e-12) == doctest::Approx(-90.0));
}
