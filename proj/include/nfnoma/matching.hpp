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

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfnoma/analog.hpp"
#include "nfnoma/digital.hpp"
#include "nfnoma/rates.hpp"

namespace nfnoma {

// Antenna splits (N - N_min - q, N_min + q) for q = 0 .. N - 2 N_min.
struct StrategySet {
  std::vector<AntennaSplit> strategies;
  int min_antennas = 1;

  int size() const { return static_cast<int>(strategies.size()); }
  const AntennaSplit& operator[](int q) const { return strategies[static_cast<std::size_t>(q)]; }
};

StrategySet strategy_set(int num_antennas, int min_antennas);

// ceil(fraction * n), with a small guard so that e.g. 0.2 * 10 stays 2.
int min_antennas_for(int num_antennas, double fraction);

class MatchingState {
 public:
  MatchingState(int num_clusters, int num_strategies);

  int num_clusters() const { return static_cast<int>(assignment_.size()); }
  int num_strategies() const { return static_cast<int>(members_.size()); }
  // -1 when unmatched.
  int strategy_of(int cluster) const { return assignment_[static_cast<std::size_t>(cluster)]; }
  const std::vector<int>& members(int strategy) const { return members_[static_cast<std::size_t>(strategy)]; }
  const std::vector<int>& unmatched() const { return unmatched_; }
  const std::vector<int>& assignment() const { return assignment_; }
  bool complete() const { return unmatched_.empty(); }

  void assign(int cluster, int strategy);
  void swap(int a, int b);
  // Throws std::logic_error when the forward and inverse maps disagree.
  void check_consistency() const;

  friend bool operator==(const MatchingState& a, const MatchingState& b) { return a.assignment_ == b.assignment_; }

 private:
  void remove_member(int cluster, int strategy);

  std::vector<int> assignment_;
  std::vector<std::vector<int>> members_;  // sorted
  std::vector<int> unmatched_;             // sorted
};

using BeamBuilder = std::function<AnalogBeamformer(int cluster, const AntennaSplit& split)>;
using DigitalDesigner =
    std::function<DigitalBeamformer(std::span<const ChannelVector>, std::span<const AnalogBeamformer>)>;

struct MatchingContext {
  std::vector<ChannelVector> channels;  // cluster-major, H then L
  StrategySet strategies;
  BeamBuilder beam;
  DigitalDesigner digital;
  PowerAllocation power;                // held fixed while matching
  double noise_w = 1e-12;
  std::vector<double> eta;              // per-cluster leakage scale

  int num_clusters() const { return static_cast<int>(channels.size() / 2); }
};

// Caches the analog beamformer of every (cluster, strategy) pair.
class MatchingEvaluator {
 public:
  explicit MatchingEvaluator(const MatchingContext& ctx);

  const MatchingContext& context() const { return ctx_; }
  const AnalogBeamformer& beam(int cluster, int strategy) const;
  std::vector<AnalogBeamformer> beams(const std::vector<int>& assignment) const;
  // nullopt when the digital design is ill-conditioned for this assignment.
  std::optional<EffectiveGains> gains(const std::vector<int>& assignment) const;

 private:
  const MatchingContext& ctx_;
  std::vector<AnalogBeamformer> cache_;  // cluster-major
};

double preference(const MatchingEvaluator& ev, int cluster, int strategy);

double cluster_utility(const MatchingContext& ctx, const EffectiveGains& gains, int cluster);
double cluster_utility(const MatchingEvaluator& ev, int cluster, const std::vector<int>& assignment);

// Sum H rate of the whole system; the same for every strategy.
double strategy_utility(const MatchingContext& ctx, const EffectiveGains& gains, int strategy);
double strategy_utility(const MatchingEvaluator& ev, int strategy, const std::vector<int>& assignment);

MatchingState initial_matching(const MatchingEvaluator& ev);

inline constexpr double kSwapMargin = 1e-9;

bool is_swap_blocking(const MatchingEvaluator& ev, int a, int b, const MatchingState& state);

struct SwapRecord {
  int round = 0;
  int cluster_a = 0;
  int cluster_b = 0;
  double delta_sum_rate = 0.0;
};

struct MatchingResult {
  MatchingState state;
  int swaps = 0;
  bool capped = false;
  double initial_sum_rate = 0.0;
  double final_sum_rate = 0.0;
  std::vector<SwapRecord> trace;
  std::string warning;
};

// Default swap cap 4 M^2 Q^2 when max_swaps < 0.
MatchingResult allocate_antennas(const MatchingEvaluator& ev, long max_swaps = -1);

void write_matching_trace(std::ostream& out, const std::vector<SwapRecord>& trace);

}  // namespace nfnoma
