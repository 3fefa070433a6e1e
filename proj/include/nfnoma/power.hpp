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

#include <string>
#include <vector>

#include "nfnoma/rates.hpp"
#include "nfnoma/solver.hpp"

namespace nfnoma {

/// 2^R - 1: the SINR needed for a rate of R bit/s/Hz.
double sinr_threshold(double rate_min);

struct QosThresholds {
  std::vector<double> rate_h;  // bit/s/Hz per cluster
  std::vector<double> rate_l;

  static QosThresholds uniform(int num_clusters, double rate_h_min, double rate_l_min);
  int num_clusters() const { return static_cast<int>(rate_h.size()); }
  double sinr_h(int m) const { return sinr_threshold(rate_h[static_cast<std::size_t>(m)]); }
  double sinr_l(int m) const { return sinr_threshold(rate_l[static_cast<std::size_t>(m)]); }
};

/// Which QoS constraint set to build.
/// kSlb: H-user constraints without inter-cluster terms (valid after H-user zero forcing).
/// kMlb: the general set where the H user still sees inter-cluster interference.
enum class Formulation { kSlb, kMlb };

/// Positivity floor p >= kPowerFloor * P_max.
inline constexpr double kPowerFloor = 1e-9;

struct PowerProblem {
  EffectiveGains gains;
  QosThresholds qos;
  double pmax_w = 1.0;
  double noise_w = 1e-12;
};

/// Constraint polyhedron in normalised coordinates x = p / P_max.
LinearConstraints power_constraints(const PowerProblem& problem, Formulation formulation);

/// Largest violation of the QoS/budget/floor constraints at p, in watts relative to P_max.
/// Evaluated directly from the constraint formulas, independent of power_constraints().
struct ConstraintCheck {
  double max_violation = 0.0;
  std::string worst;
};
ConstraintCheck check_power_constraints(const PowerAllocation& p, const PowerProblem& problem, Formulation formulation);

struct PowerSolution {
  PowerAllocation p;
  double objective = 0.0;          // sum H rate, bit/s/Hz
  KktReport kkt;                   // of the last convex solve, normalised coordinates
  int newton_steps = 0;
  int outer_iterations = 0;
  std::vector<double> trace;       // sum H rate after each FP iteration (MLB only)
  bool converged = false;
  std::string diagnostic;
};

/// Convex power allocation after single-location beams and ZF: maximise sum log2(1 + p_mh |g_mh|^2 / s^2).
PowerSolution solve_slb(const PowerProblem& problem, const SolverOptions& opts = {});

/// beta_m = sqrt(p_mh |g_mh|^2) / (I_mh + s^2).
std::vector<double> optimal_beta(const PowerAllocation& p, const EffectiveGains& gains, double noise_w);

/// Quadratic-transform surrogate sum_m log2(1 + 2 beta_m sqrt(p_mh|g_mh|^2) - beta_m^2 (I_mh + s^2)).
/// Throws std::domain_error when a log argument is not positive.
double fp_objective(const PowerAllocation& p, const std::vector<double>& beta, const EffectiveGains& gains,
                    double noise_w);

/// Maximises fp_objective for fixed beta over the MLB constraint polyhedron, starting from `start`
/// (which must lie in the surrogate's domain) or a phase-one point.
PowerSolution solve_fp_inner(const std::vector<double>& beta, const PowerProblem& problem, const SolverOptions& opts,
                             const PowerAllocation* start = nullptr);

/// Any feasible point: the uniform split when it satisfies every constraint, otherwise the
/// minimiser of the largest constraint violation. Throws InfeasibleError when none exists.
PowerAllocation find_feasible(const PowerProblem& problem, Formulation formulation = Formulation::kMlb);

/// Alternating quadratic-transform power allocation for the MLB problem.
PowerSolution solve_mlb(const PowerProblem& problem, const SolverOptions& opts = {},
                        const PowerAllocation* init = nullptr);

/// Sum H rate with inter-cluster interference (the objective of both problems under ZF).
double sum_rate_h(const PowerAllocation& p, const EffectiveGains& gains, double noise_w);

}  // namespace nfnoma
