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

#include "nfnoma/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "nfnoma/format.hpp"
#include "nfnoma/power.hpp"

namespace nfnoma {

StrategySet strategy_set(int num_antennas, int min_antennas) {
  if (min_antennas < 1 || 2 * min_antennas > num_antennas) {
    throw std::invalid_argument("strategy_set: need 1 <= N_min <= N/2, got N_min = " + std::to_string(min_antennas) +
                                " for N = " + std::to_string(num_antennas));
  }
  StrategySet set;
  set.min_antennas = min_antennas;
  for (int q = 0; q <= num_antennas - 2 * min_antennas; ++q) {
    set.strategies.push_back({num_antennas - min_antennas - q, min_antennas + q});
  }
  return set;
}

int min_antennas_for(int num_antennas, double fraction) {
  if (!(fraction > 0.0 && fraction <= 0.5)) throw std::invalid_argument("min_antennas_for: fraction must be in (0, 0.5]");
  return std::max(1, static_cast<int>(std::ceil(fraction * num_antennas - 1e-9)));
}

MatchingState::MatchingState(int num_clusters, int num_strategies)
    : assignment_(static_cast<std::size_t>(num_clusters), -1), members_(static_cast<std::size_t>(num_strategies)) {
  for (int m = 0; m < num_clusters; ++m) unmatched_.push_back(m);
}

void MatchingState::remove_member(int cluster, int strategy) {
  auto& v = members_[static_cast<std::size_t>(strategy)];
  v.erase(std::find(v.begin(), v.end(), cluster));
}

void MatchingState::assign(int cluster, int strategy) {
  if (cluster < 0 || cluster >= num_clusters() || strategy < 0 || strategy >= num_strategies()) {
    throw std::out_of_range("MatchingState::assign: index out of range");
  }
  const int old = strategy_of(cluster);
  if (old == strategy) return;
  if (old >= 0) {
    remove_member(cluster, old);
  } else {
    unmatched_.erase(std::find(unmatched_.begin(), unmatched_.end(), cluster));
  }
  auto& v = members_[static_cast<std::size_t>(strategy)];
  v.insert(std::upper_bound(v.begin(), v.end(), cluster), cluster);
  assignment_[static_cast<std::size_t>(cluster)] = strategy;
}

void MatchingState::swap(int a, int b) {
  const int qa = strategy_of(a);
  const int qb = strategy_of(b);
  if (qa < 0 || qb < 0) throw std::logic_error("MatchingState::swap: both clusters must be matched");
  assign(a, qb);
  assign(b, qa);
}

void MatchingState::check_consistency() const {
  std::size_t matched = 0;
  for (int q = 0; q < num_strategies(); ++q) {
    for (int m : members(q)) {
      if (strategy_of(m) != q) throw std::logic_error("MatchingState: inverse map lists a cluster on the wrong strategy");
    }
    matched += members(q).size();
  }
  for (int m : unmatched_) {
    if (strategy_of(m) != -1) throw std::logic_error("MatchingState: matched cluster listed as unmatched");
  }
  if (matched + unmatched_.size() != assignment_.size()) {
    throw std::logic_error("MatchingState: forward and inverse maps cover different cluster counts");
  }
}

MatchingEvaluator::MatchingEvaluator(const MatchingContext& ctx) : ctx_(ctx) {
  const int mrf = ctx.num_clusters();
  if (static_cast<int>(ctx.channels.size()) != 2 * mrf || mrf == 0) {
    throw std::invalid_argument("MatchingEvaluator: expected two channels per cluster");
  }
  if (ctx.power.num_clusters() != mrf) throw std::invalid_argument("MatchingEvaluator: power vector size mismatch");
  if (static_cast<int>(ctx.eta.size()) != mrf) throw std::invalid_argument("MatchingEvaluator: eta size mismatch");
  if (!ctx.beam || !ctx.digital) throw std::invalid_argument("MatchingEvaluator: beam builder and digital designer required");
  cache_.reserve(static_cast<std::size_t>(mrf * ctx.strategies.size()));
  for (int m = 0; m < mrf; ++m) {
    for (int q = 0; q < ctx.strategies.size(); ++q) cache_.push_back(ctx.beam(m, ctx.strategies[q]));
  }
}

const AnalogBeamformer& MatchingEvaluator::beam(int cluster, int strategy) const {
  return cache_[static_cast<std::size_t>(cluster * ctx_.strategies.size() + strategy)];
}

std::vector<AnalogBeamformer> MatchingEvaluator::beams(const std::vector<int>& assignment) const {
  std::vector<AnalogBeamformer> out;
  out.reserve(assignment.size());
  for (std::size_t m = 0; m < assignment.size(); ++m) out.push_back(beam(static_cast<int>(m), assignment[m]));
  return out;
}

std::optional<EffectiveGains> MatchingEvaluator::gains(const std::vector<int>& assignment) const {
  const auto analog = beams(assignment);
  try {
    return effective_gains(ctx_.channels, analog, ctx_.digital(ctx_.channels, analog));
  } catch (const IllConditionedError&) {
    return std::nullopt;
  }
}

double preference(const MatchingEvaluator& ev, int cluster, int strategy) {
  const auto& ctx = ev.context();
  const CVector& w = ev.beam(cluster, strategy).weights();
  double own = 0.0;
  double leak = 0.0;
  for (int i = 0; i < ctx.num_clusters(); ++i) {
    for (Role k : {Role::kH, Role::kL}) {
      const double g2 = std::norm(ctx.channels[static_cast<std::size_t>(user_index(i, k))].entries.dot(w));
      if (i == cluster) own += ctx.power.at(cluster, k) * g2;
      else leak += g2;
    }
  }
  const double denom = ctx.power.cluster_power(cluster) * leak;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return own / denom;
}

double cluster_utility(const MatchingContext& ctx, const EffectiveGains& gains, int cluster) {
  double leak = 0.0;
  for (int i = 0; i < ctx.num_clusters(); ++i) {
    if (i == cluster) continue;
    leak += gains.cross_sq(cluster, user_index(i, Role::kH)) + gains.cross_sq(cluster, user_index(i, Role::kL));
  }
  return rate_h(ctx.power, gains, ctx.noise_w, cluster) -
         ctx.power.cluster_power(cluster) / ctx.eta[static_cast<std::size_t>(cluster)] * leak;
}

double cluster_utility(const MatchingEvaluator& ev, int cluster, const std::vector<int>& assignment) {
  const auto g = ev.gains(assignment);
  return g ? cluster_utility(ev.context(), *g, cluster) : -std::numeric_limits<double>::infinity();
}

double strategy_utility(const MatchingContext& ctx, const EffectiveGains& gains, int /*strategy*/) {
  return sum_rate_h(ctx.power, gains, ctx.noise_w);
}

double strategy_utility(const MatchingEvaluator& ev, int strategy, const std::vector<int>& assignment) {
  const auto g = ev.gains(assignment);
  return g ? strategy_utility(ev.context(), *g, strategy) : -std::numeric_limits<double>::infinity();
}

MatchingState initial_matching(const MatchingEvaluator& ev) {
  const auto& ctx = ev.context();
  MatchingState state(ctx.num_clusters(), ctx.strategies.size());
  // Every strategy accepts all proposals, so one proposal round settles every cluster.
  while (!state.complete()) {
    const std::vector<int> proposers = state.unmatched();
    for (int m : proposers) {
      int best = 0;
      double best_phi = -std::numeric_limits<double>::infinity();
      for (int q = 0; q < ctx.strategies.size(); ++q) {
        const double phi = preference(ev, m, q);
        if (phi > best_phi) {
          best_phi = phi;
          best = q;
        }
      }
      state.assign(m, best);
    }
  }
  return state;
}

namespace {

struct Utilities {
  double a = 0.0;
  double b = 0.0;
  double total = 0.0;
};

Utilities utilities(const MatchingEvaluator& ev, const std::vector<int>& assignment, int a, int b) {
  const auto g = ev.gains(assignment);
  if (!g) {
    const double inf = -std::numeric_limits<double>::infinity();
    return {inf, inf, inf};
  }
  return {cluster_utility(ev.context(), *g, a), cluster_utility(ev.context(), *g, b),
          strategy_utility(ev.context(), *g, assignment[static_cast<std::size_t>(a)])};
}

struct SwapEval {
  bool blocking = false;
  double delta_total = 0.0;
};

SwapEval evaluate_swap(const MatchingEvaluator& ev, int a, int b, const MatchingState& state) {
  if (a == b) throw std::invalid_argument("is_swap_blocking: a cluster cannot swap with itself");
  const int qa = state.strategy_of(a);
  const int qb = state.strategy_of(b);
  if (qa < 0 || qb < 0) throw std::invalid_argument("is_swap_blocking: both clusters must be matched");
  if (qa == qb) return {};
  std::vector<int> after = state.assignment();
  std::swap(after[static_cast<std::size_t>(a)], after[static_cast<std::size_t>(b)]);
  const Utilities u0 = utilities(ev, state.assignment(), a, b);
  const Utilities u1 = utilities(ev, after, a, b);
  // Strategy utilities of q and q~ both equal the system sum rate.
  const bool none_worse = u1.a >= u0.a && u1.b >= u0.b && u1.total >= u0.total;
  const bool one_better = u1.a > u0.a + kSwapMargin || u1.b > u0.b + kSwapMargin || u1.total > u0.total + kSwapMargin;
  return {none_worse && one_better, u1.total - u0.total};
}

}  // namespace

bool is_swap_blocking(const MatchingEvaluator& ev, int a, int b, const MatchingState& state) {
  return evaluate_swap(ev, a, b, state).blocking;
}

MatchingResult allocate_antennas(const MatchingEvaluator& ev, long max_swaps) {
  const auto& ctx = ev.context();
  const long mrf = ctx.num_clusters();
  const long q = ctx.strategies.size();
  if (max_swaps < 0) max_swaps = 4 * mrf * mrf * q * q;
  MatchingResult res{initial_matching(ev), 0, false, 0.0, 0.0, {}, {}};
  res.initial_sum_rate = strategy_utility(ev, 0, res.state.assignment());
  bool found = true;
  while (found) {
    found = false;
    for (int a = 0; a < mrf && !found; ++a) {
      for (int b = a + 1; b < mrf && !found; ++b) {
        const SwapEval e = evaluate_swap(ev, a, b, res.state);
        if (!e.blocking) continue;
        if (res.swaps >= max_swaps) {
          res.capped = true;
          res.warning = "swap cap of " + std::to_string(max_swaps) + " reached; matching may not be exchange-stable";
          res.final_sum_rate = strategy_utility(ev, 0, res.state.assignment());
          return res;
        }
        res.state.swap(a, b);
        ++res.swaps;
        res.trace.push_back({res.swaps, a, b, e.delta_total});
        found = true;
      }
    }
  }
  res.final_sum_rate = strategy_utility(ev, 0, res.state.assignment());
  return res;
}

void write_matching_trace(std::ostream& out, const std::vector<SwapRecord>& trace) {
  for (const auto& r : trace) {
    out << "round " << r.round << " swap " << r.cluster_a << ' ' << r.cluster_b << " dU "
        << format_number(r.delta_sum_rate) << '\n';
  }
}

}  // namespace nfnoma
