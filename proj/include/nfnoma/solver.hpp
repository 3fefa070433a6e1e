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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nfnoma {

/// Polyhedron { x : a x <= b }. Labels name the rows in diagnostics.
struct LinearConstraints {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<std::string> labels;

  int rows() const { return static_cast<int>(a.rows()); }
  int dims() const { return static_cast<int>(a.cols()); }
  void add(const Eigen::VectorXd& row, double rhs, std::string label);

  /// Largest value of a_i x - b_i, and the row attaining it.
  std::pair<double, int> max_violation(const Eigen::VectorXd& x) const;
};

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Returns nullopt outside the objective's domain; the solver treats that like an infeasible step.
using ConcaveObjective = std::function<std::optional<ObjectiveValue>(const Eigen::VectorXd&)>;

struct SolverOptions {
  double tolerance = 1e-8;       // KKT residual target
  int max_newton_steps = 3000;   // across all barrier stages
  double initial_barrier = 1.0;
  double barrier_growth = 10.0;
  double outer_tolerance = 1e-6; // relative objective change, alternating (FP) loop
  int max_outer_iterations = 200;

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

struct KktReport {
  double stationarity = 0.0;     // || grad f - A^T lambda ||_inf
  double complementarity = 0.0;  // max lambda_i s_i
  double primal_violation = 0.0; // max(0, a x - b)
  double residual() const;
};

struct SolveResult {
  Eigen::VectorXd x;
  Eigen::VectorXd interior;  // last strictly feasible barrier iterate, for warm starts
  double objective = 0.0;
  Eigen::VectorXd multipliers;
  KktReport kkt;
  int newton_steps = 0;
  bool converged = false;
  std::string diagnostic;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double violation, std::string constraint)
      : std::runtime_error(what), violation_(violation), constraint_(std::move(constraint)) {}
  /// Smallest achievable maximum violation (row-normalised); > 0 means infeasible.
  double violation() const { return violation_; }
  const std::string& constraint() const { return constraint_; }

 private:
  double violation_;
  std::string constraint_;
};

struct PhaseOneResult {
  Eigen::VectorXd x;
  double max_violation = 0.0;  // row-normalised, minimised; negative = strictly interior
  int worst_row = -1;
};

/// Minimises the largest row-normalised violation max_i (a_i x - b_i)/||a_i|| (a linear
/// program solved by the same barrier method). Never throws for infeasibility.
PhaseOneResult phase_one(const LinearConstraints& constraints, const Eigen::VectorXd& guess,
                         const SolverOptions& opts = {});

/// Log-barrier Newton method for a concave objective over a polyhedron. `start` need not be
/// feasible; a phase-one solve supplies an interior point when it is not strictly interior.
/// Throws InfeasibleError when the polyhedron has no interior.
SolveResult maximize_concave(const ConcaveObjective& objective, const LinearConstraints& constraints,
                             const Eigen::VectorXd& start, const SolverOptions& opts = {});

}  // namespace nfnoma
