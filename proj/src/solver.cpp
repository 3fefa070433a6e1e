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

#include "nfnoma/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace nfnoma {

void LinearConstraints::add(const Eigen::VectorXd& row, double rhs, std::string label) {
  if (a.size() == 0) a.resize(0, row.size());
  if (row.size() != a.cols()) throw std::invalid_argument("LinearConstraints::add: row width mismatch");
  a.conservativeResize(a.rows() + 1, Eigen::NoChange);
  a.row(a.rows() - 1) = row.transpose();
  b.conservativeResize(b.size() + 1);
  b(b.size() - 1) = rhs;
  labels.push_back(std::move(label));
}

std::pair<double, int> LinearConstraints::max_violation(const Eigen::VectorXd& x) const {
  if (rows() == 0) return {-std::numeric_limits<double>::infinity(), -1};
  const Eigen::VectorXd v = a * x - b;
  Eigen::Index idx = 0;
  const double worst = v.maxCoeff(&idx);
  return {worst, static_cast<int>(idx)};
}

double KktReport::residual() const { return std::max({stationarity, complementarity, primal_violation}); }

namespace {

struct Barrier {
  const ConcaveObjective& objective;
  const LinearConstraints& cons;

  // phi = t f + sum log(s); nullopt when infeasible or outside the objective's domain.
  std::optional<double> value(const Eigen::VectorXd& x, double t) const {
    const Eigen::VectorXd s = cons.b - cons.a * x;
    if (cons.rows() > 0 && !(s.minCoeff() > 0.0)) return std::nullopt;
    const auto f = objective(x);
    if (!f || !std::isfinite(f->value)) return std::nullopt;
    return t * f->value + s.array().log().sum();
  }
};

KktReport kkt_at(const ObjectiveValue& f, const LinearConstraints& cons, const Eigen::VectorXd& x, double t,
                 Eigen::VectorXd* multipliers) {
  KktReport k;
  const Eigen::VectorXd s = cons.b - cons.a * x;
  const Eigen::VectorXd lambda = (t * s.array()).inverse().matrix();
  k.stationarity = (f.gradient - cons.a.transpose() * lambda).cwiseAbs().maxCoeff();
  k.complementarity = cons.rows() > 0 ? (lambda.array() * s.array()).maxCoeff() : 0.0;
  k.primal_violation = cons.rows() > 0 ? std::max(0.0, -s.minCoeff()) : 0.0;
  if (multipliers != nullptr) *multipliers = lambda;
  return k;
}

struct FaceSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
};

// Maximise f on {A_E x = b_E} by Newton on the KKT system, starting from the projection of x0.
std::optional<FaceSolution> solve_on_face(const ConcaveObjective& objective, const LinearConstraints& cons,
                                          const std::vector<int>& active, const Eigen::VectorXd& x0) {
  const int n = static_cast<int>(x0.size());
  const int k = static_cast<int>(active.size());
  Eigen::MatrixXd ae(k, n);
  Eigen::VectorXd be(k);
  for (int j = 0; j < k; ++j) {
    ae.row(j) = cons.a.row(active[static_cast<std::size_t>(j)]);
    be(j) = cons.b(active[static_cast<std::size_t>(j)]);
  }
  FaceSolution out{x0, Eigen::VectorXd::Zero(k)};
  Eigen::VectorXd& x = out.x;
  if (k > 0) x -= ae.transpose() * (ae * ae.transpose()).completeOrthogonalDecomposition().solve(ae * x - be);
  for (int it = 0; it < 50; ++it) {
    const auto f = objective(x);
    if (!f) return std::nullopt;
    // [H  -A^T; A  0] [dx; lambda] = [-grad; b - A x]
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = f->hessian;
    kkt.topRightCorner(n, k) = -ae.transpose();
    kkt.bottomLeftCorner(k, n) = ae;
    Eigen::VectorXd rhs(n + k);
    rhs.head(n) = -f->gradient;
    rhs.tail(k) = be - ae * x;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return std::nullopt;
    x += sol.head(n);
    out.lambda = sol.tail(k);
    if (sol.head(n).cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff())) break;
  }
  if (!objective(x)) return std::nullopt;
  return out;
}

// Active-set refinement of a barrier iterate: recovers the optimum to rounding level, which
// the barrier path alone cannot reach once 1/s^2 swamps the curvature of f. Rows with a
// negative multiplier are released one at a time.
std::optional<SolveResult> polish(const ConcaveObjective& objective, const LinearConstraints& cons,
                                  const Eigen::VectorXd& x0) {
  const Eigen::VectorXd s0 = cons.b - cons.a * x0;
  std::vector<int> active;
  for (int i = 0; i < cons.rows(); ++i) {
    if (s0(i) < 1e-5) active.push_back(i);
  }
  while (true) {
    const auto face = solve_on_face(objective, cons, active, x0);
    if (!face) return std::nullopt;
    Eigen::Index worst = 0;
    if (!active.empty() && face->lambda.minCoeff(&worst) < -1e-12) {
      active.erase(active.begin() + worst);
      continue;
    }
    const auto f = objective(face->x);
    SolveResult out;
    out.x = face->x;
    out.objective = f->value;
    out.multipliers = Eigen::VectorXd::Zero(cons.rows());
    for (std::size_t j = 0; j < active.size(); ++j) {
      out.multipliers(active[j]) = std::max(face->lambda(static_cast<Eigen::Index>(j)), 0.0);
    }
    const Eigen::VectorXd s = cons.b - cons.a * face->x;
    out.kkt.stationarity = (f->gradient - cons.a.transpose() * out.multipliers).cwiseAbs().maxCoeff();
    out.kkt.complementarity = cons.rows() > 0 ? (out.multipliers.array() * s.array()).abs().maxCoeff() : 0.0;
    out.kkt.primal_violation = cons.rows() > 0 ? std::max(0.0, -s.minCoeff()) : 0.0;
    return out;
  }
}

// Barrier path from a strictly interior point. `stop` lets phase one exit early.
SolveResult barrier_solve(const ConcaveObjective& objective, const LinearConstraints& cons, Eigen::VectorXd x,
                          const SolverOptions& opts, const std::function<bool(const Eigen::VectorXd&)>& stop = {}) {
  const Barrier phi{objective, cons};
  const int n = static_cast<int>(x.size());
  SolveResult out;
  double t = opts.initial_barrier;
  int steps = 0;
  const double gap_target = 0.1 * opts.tolerance;

  while (true) {
    // Newton centring for the current t.
    for (int inner = 0; inner < 200; ++inner) {
      const auto f = objective(x);
      if (!f) throw std::logic_error("maximize_concave: iterate left the objective domain");
      const Eigen::VectorXd s = cons.b - cons.a * x;
      const Eigen::VectorXd inv_s = s.array().inverse().matrix();
      const Eigen::VectorXd grad = t * f->gradient - cons.a.transpose() * inv_s;
      Eigen::MatrixXd neg_hess = -t * f->hessian;
      neg_hess.noalias() += cons.a.transpose() * inv_s.array().square().matrix().asDiagonal() * cons.a;

      Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
      Eigen::VectorXd dx = ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
        const double reg = 1e-12 * (1.0 + neg_hess.diagonal().cwiseAbs().maxCoeff());
        dx = (neg_hess + reg * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(grad);
      }
      const double decrement = grad.dot(dx);
      if (!(decrement > 1e-12)) break;

      const double phi0 = t * f->value + s.array().log().sum();
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const Eigen::VectorXd trial = x + alpha * dx;
        const auto v = phi.value(trial, t);
        // Near the centre the Armijo gain drops below the rounding level of t f; allow that much slack.
        if (v && *v >= phi0 + 0.25 * alpha * decrement - 1e-14 * std::abs(phi0)) {
          x = trial;
          moved = true;
          break;
        }
      }
      ++steps;
      if (!moved || steps >= opts.max_newton_steps) break;
      if (stop && stop(x)) break;
    }

    const auto f = objective(x);
    out.kkt = kkt_at(*f, cons, x, t, &out.multipliers);
    out.objective = f->value;
    out.x = x;
    out.interior = x;
    out.newton_steps = steps;
    if (stop) {
      if (stop(x) || 1.0 / t < gap_target || steps >= opts.max_newton_steps) {
        out.converged = stop(x);
        return out;
      }
      t *= opts.barrier_growth;
      continue;
    }
    if (1.0 / t <= 1e3 * gap_target) {
      if (auto p = polish(objective, cons, x);
          p && p->kkt.residual() < opts.tolerance && p->kkt.primal_violation <= 1e-12 &&
          p->objective >= out.objective - 1e-12 * (1.0 + std::abs(out.objective))) {
        p->interior = x;
        p->newton_steps = steps;
        p->converged = true;
        return *p;
      }
    }
    if (out.kkt.residual() < opts.tolerance && 1.0 / t < gap_target) {
      out.converged = true;
      return out;
    }
    if (steps >= opts.max_newton_steps) {
      out.diagnostic = "newton step cap reached; KKT residual " + std::to_string(out.kkt.residual());
      return out;
    }
    if (1.0 / t < 1e-3 * gap_target) {
      out.diagnostic = "barrier parameter exhausted; KKT residual " + std::to_string(out.kkt.residual());
      return out;
    }
    t *= opts.barrier_growth;
  }
}

}  // namespace

PhaseOneResult phase_one(const LinearConstraints& constraints, const Eigen::VectorXd& guess, const SolverOptions& opts) {
  const int n = constraints.dims();
  const int m = constraints.rows();
  PhaseOneResult res;
  if (m == 0) {
    res.x = guess;
    res.max_violation = -std::numeric_limits<double>::infinity();
    return res;
  }
  // Variables (x, s): a_i x / ||a_i|| - s <= b_i / ||a_i||,  s >= -1.
  LinearConstraints lifted;
  lifted.a = Eigen::MatrixXd::Zero(m + 1, n + 1);
  lifted.b = Eigen::VectorXd::Zero(m + 1);
  for (int i = 0; i < m; ++i) {
    double norm = constraints.a.row(i).norm();
    if (norm == 0.0) norm = 1.0;
    lifted.a.row(i).head(n) = constraints.a.row(i) / norm;
    lifted.a(i, n) = -1.0;
    lifted.b(i) = constraints.b(i) / norm;
  }
  lifted.a(m, n) = -1.0;
  lifted.b(m) = 1.0;
  lifted.labels.assign(static_cast<std::size_t>(m + 1), "");

  Eigen::VectorXd y(n + 1);
  y.head(n) = guess;
  const Eigen::VectorXd viol = lifted.a.topLeftCorner(m, n) * guess - lifted.b.head(m);
  y(n) = std::max(viol.maxCoeff() + 1.0, 0.0);

  const ConcaveObjective linear = [n](const Eigen::VectorXd& v) -> std::optional<ObjectiveValue> {
    ObjectiveValue o;
    o.value = -v(n);
    o.gradient = Eigen::VectorXd::Zero(n + 1);
    o.gradient(n) = -1.0;
    o.hessian = Eigen::MatrixXd::Zero(n + 1, n + 1);
    return o;
  };
  SolverOptions p1 = opts;
  p1.tolerance = 1e-9;
  // The margin only needs to be comfortably negative; the main solve re-centres anyway.
  const auto stop = [n](const Eigen::VectorXd& v) { return v(n) < -0.05; };
  const SolveResult sol = barrier_solve(linear, lifted, y, p1, stop);
  res.x = sol.x.head(n);
  const Eigen::VectorXd final_viol = lifted.a.topLeftCorner(m, n) * res.x - lifted.b.head(m);
  Eigen::Index worst = 0;
  res.max_violation = final_viol.maxCoeff(&worst);
  res.worst_row = static_cast<int>(worst);
  return res;
}

SolveResult maximize_concave(const ConcaveObjective& objective, const LinearConstraints& constraints,
                             const Eigen::VectorXd& start, const SolverOptions& opts) {
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("maximize_concave: tolerance must be > 0");
  if (constraints.rows() > 0 && constraints.dims() != start.size()) {
    throw std::invalid_argument("maximize_concave: start dimension does not match the constraints");
  }
  Eigen::VectorXd x = start;
  const bool interior = constraints.rows() == 0 || (constraints.b - constraints.a * x).minCoeff() > 0.0;
  if (!interior || !objective(x)) {
    const PhaseOneResult p1 = phase_one(constraints, x, opts);
    if (!(p1.max_violation < 0.0)) {
      const std::string label =
          p1.worst_row >= 0 && static_cast<std::size_t>(p1.worst_row) < constraints.labels.size()
              ? constraints.labels[static_cast<std::size_t>(p1.worst_row)]
              : std::string("row ") + std::to_string(p1.worst_row);
      throw InfeasibleError("infeasible: constraint '" + label + "' violated by at least " +
                                std::to_string(p1.max_violation) + " (row-normalised)",
                            p1.max_violation, label);
    }
    x = p1.x;
    if (!objective(x)) throw std::invalid_argument("maximize_concave: interior point outside the objective domain");
  }
  return barrier_solve(objective, constraints, std::move(x), opts);
}

}  // namespace nfnoma
