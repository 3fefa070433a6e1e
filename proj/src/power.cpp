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

#include "nfnoma/power.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nfnoma {

double sinr_threshold(double rate_min) { return std::exp2(rate_min) - 1.0; }

QosThresholds QosThresholds::uniform(int num_clusters, double rate_h_min, double rate_l_min) {
  QosThresholds q;
  q.rate_h.assign(static_cast<std::size_t>(num_clusters), rate_h_min);
  q.rate_l.assign(static_cast<std::size_t>(num_clusters), rate_l_min);
  return q;
}

namespace {

void check_problem(const PowerProblem& pr) {
  if (pr.qos.num_clusters() != pr.gains.num_clusters()) {
    throw std::invalid_argument("power allocation: QoS thresholds and gains disagree on the cluster count");
  }
  if (!(pr.pmax_w > 0.0) || !(pr.noise_w > 0.0)) {
    throw std::invalid_argument("power allocation: P_max and noise power must be > 0");
  }
  for (int m = 0; m < pr.gains.num_clusters(); ++m) {
    if (!(pr.gains.own_sq(m, Role::kH) > 0.0) || !(pr.gains.own_sq(m, Role::kL) > 0.0)) {
      throw std::invalid_argument("power allocation: cluster " + std::to_string(m) + " has a zero effective gain");
    }
  }
}

std::string label(const char* what, int m) { return std::string(what) + "[cluster " + std::to_string(m) + "]"; }

// Adds coeff * (x_ih + x_il) for all i != m, weighted by |g_{i,u}|^2 / own.
void add_interference(Eigen::VectorXd& row, const EffectiveGains& g, int m, int user, double coeff, double own) {
  for (int i = 0; i < g.num_clusters(); ++i) {
    if (i == m) continue;
    const double w = coeff * g.cross_sq(i, user) / own;
    row(2 * i) += w;
    row(2 * i + 1) += w;
  }
}

}  // namespace

LinearConstraints power_constraints(const PowerProblem& pr, Formulation formulation) {
  check_problem(pr);
  const auto& g = pr.gains;
  const int mrf = g.num_clusters();
  const int n = 2 * mrf;
  const double snr_scale = pr.noise_w / pr.pmax_w;
  LinearConstraints c;
  c.a.resize(0, n);
  for (int m = 0; m < mrf; ++m) {
    const int uh = user_index(m, Role::kH);
    const int ul = user_index(m, Role::kL);
    const double gh = g.own_sq(m, Role::kH);
    const double gl = g.own_sq(m, Role::kL);
    const double rh = pr.qos.sinr_h(m);
    const double rl = pr.qos.sinr_l(m);

    // p_mh >= r_h (I_mh + s^2) / |g_mh|^2
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    row(uh) = -1.0;
    if (formulation == Formulation::kMlb) add_interference(row, g, m, uh, rh, gh);
    c.add(row, -rh * snr_scale / gh, label("h-qos", m));

    // p_ml >= r_l (p_mh + (I_mh + s^2) / |g_mh|^2): L signal decodable at the H user
    row.setZero();
    row(ul) = -1.0;
    row(uh) = rl;
    if (formulation == Formulation::kMlb) add_interference(row, g, m, uh, rl, gh);
    c.add(row, -rl * snr_scale / gh, label("l-qos-at-h", m));

    // p_ml >= r_l (p_mh + (I_ml + s^2) / |g_ml|^2): L signal decodable at the L user
    row.setZero();
    row(ul) = -1.0;
    row(uh) = rl;
    add_interference(row, g, m, ul, rl, gl);
    c.add(row, -rl * snr_scale / gl, label("l-qos-at-l", m));
  }
  c.add(Eigen::VectorXd::Ones(n), 1.0, "budget");
  for (int u = 0; u < n; ++u) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    row(u) = -1.0;
    c.add(row, -kPowerFloor, label(u % 2 == 0 ? "floor-h" : "floor-l", u / 2));
  }
  return c;
}

ConstraintCheck check_power_constraints(const PowerAllocation& p, const PowerProblem& pr, Formulation formulation) {
  check_problem(pr);
  const auto& g = pr.gains;
  ConstraintCheck out;
  out.max_violation = -std::numeric_limits<double>::infinity();
  auto note = [&](double violation_w, std::string name) {
    const double v = violation_w / pr.pmax_w;
    if (v > out.max_violation) {
      out.max_violation = v;
      out.worst = std::move(name);
    }
  };
  for (int m = 0; m < g.num_clusters(); ++m) {
    const double ph = p.at(m, Role::kH);
    const double pl = p.at(m, Role::kL);
    const double ih = formulation == Formulation::kMlb ? inter_cluster_interference(p, g, m, Role::kH) : 0.0;
    const double ih_all = inter_cluster_interference(p, g, m, Role::kH);
    const double il = inter_cluster_interference(p, g, m, Role::kL);
    const double rh = pr.qos.sinr_h(m);
    const double rl = pr.qos.sinr_l(m);
    note(rh * (ih + pr.noise_w) / g.own_sq(m, Role::kH) - ph, label("h-qos", m));
    const double ih_for_l = formulation == Formulation::kMlb ? ih_all : 0.0;
    note(rl * (ph + (ih_for_l + pr.noise_w) / g.own_sq(m, Role::kH)) - pl, label("l-qos-at-h", m));
    note(rl * (ph + (il + pr.noise_w) / g.own_sq(m, Role::kL)) - pl, label("l-qos-at-l", m));
    note(kPowerFloor * pr.pmax_w - ph, label("floor-h", m));
    note(kPowerFloor * pr.pmax_w - pl, label("floor-l", m));
  }
  note(p.total() - pr.pmax_w, "budget");
  return out;
}

double sum_rate_h(const PowerAllocation& p, const EffectiveGains& gains, double noise_w) {
  double s = 0.0;
  for (int m = 0; m < gains.num_clusters(); ++m) s += rate_h(p, gains, noise_w, m);
  return s;
}

namespace {

constexpr double kLn2 = std::numbers::ln2;

PowerAllocation to_power(const Eigen::VectorXd& x, double pmax) { return PowerAllocation(x * pmax); }

PowerSolution from_result(const SolveResult& r, double pmax) {
  PowerSolution s;
  s.p = to_power(r.x, pmax);
  s.kkt = r.kkt;
  s.newton_steps = r.newton_steps;
  s.converged = r.converged;
  s.diagnostic = r.diagnostic;
  return s;
}

// Strictly interior point of the polyhedron, or InfeasibleError.
Eigen::VectorXd interior_point(const LinearConstraints& c, int mrf) {
  const Eigen::VectorXd guess = Eigen::VectorXd::Constant(2 * mrf, 0.5 / (2.0 * mrf));
  const PhaseOneResult p1 = phase_one(c, guess);
  if (!(p1.max_violation < 0.0)) {
    const std::string name = c.labels[static_cast<std::size_t>(p1.worst_row)];
    throw InfeasibleError("power allocation infeasible: '" + name + "' cannot be met (normalised violation " +
                              std::to_string(p1.max_violation) + ")",
                          p1.max_violation, name);
  }
  return p1.x;
}

}  // namespace

PowerSolution solve_slb(const PowerProblem& pr, const SolverOptions& opts) {
  const LinearConstraints cons = power_constraints(pr, Formulation::kSlb);
  const int mrf = pr.gains.num_clusters();
  std::vector<double> snr(static_cast<std::size_t>(mrf));
  for (int m = 0; m < mrf; ++m) snr[static_cast<std::size_t>(m)] = pr.pmax_w * pr.gains.own_sq(m, Role::kH) / pr.noise_w;

  const ConcaveObjective f = [&snr, mrf](const Eigen::VectorXd& x) -> std::optional<ObjectiveValue> {
    ObjectiveValue o;
    o.gradient = Eigen::VectorXd::Zero(2 * mrf);
    o.hessian = Eigen::MatrixXd::Zero(2 * mrf, 2 * mrf);
    for (int m = 0; m < mrf; ++m) {
      const double a = snr[static_cast<std::size_t>(m)];
      const double arg = 1.0 + a * x(2 * m);
      if (!(arg > 0.0)) return std::nullopt;
      o.value += std::log(arg) / kLn2;
      o.gradient(2 * m) = a / (arg * kLn2);
      o.hessian(2 * m, 2 * m) = -a * a / (arg * arg * kLn2);
    }
    return o;
  };
  const SolveResult r = maximize_concave(f, cons, interior_point(cons, mrf), opts);
  PowerSolution s = from_result(r, pr.pmax_w);
  s.objective = sum_rate_h(s.p, pr.gains, pr.noise_w);
  return s;
}

std::vector<double> optimal_beta(const PowerAllocation& p, const EffectiveGains& gains, double noise_w) {
  std::vector<double> beta(static_cast<std::size_t>(gains.num_clusters()));
  for (int m = 0; m < gains.num_clusters(); ++m) {
    beta[static_cast<std::size_t>(m)] = std::sqrt(p.at(m, Role::kH) * gains.own_sq(m, Role::kH)) /
                                        (inter_cluster_interference(p, gains, m, Role::kH) + noise_w);
  }
  return beta;
}

double fp_objective(const PowerAllocation& p, const std::vector<double>& beta, const EffectiveGains& gains,
                    double noise_w) {
  double total = 0.0;
  for (int m = 0; m < gains.num_clusters(); ++m) {
    const double b = beta[static_cast<std::size_t>(m)];
    const double arg = 1.0 + 2.0 * b * std::sqrt(p.at(m, Role::kH) * gains.own_sq(m, Role::kH)) -
                       b * b * (inter_cluster_interference(p, gains, m, Role::kH) + noise_w);
    if (!(arg > 0.0)) {
      throw std::domain_error("fp_objective: non-positive log argument for cluster " + std::to_string(m));
    }
    total += std::log2(arg);
  }
  return total;
}

namespace {

// Below this the surrogate's log argument is treated as outside the domain.
constexpr double kFpDomainGuard = 1e-12;

ConcaveObjective fp_surrogate(const std::vector<double>& beta, const PowerProblem& pr) {
  const int mrf = pr.gains.num_clusters();
  // u_m = 1 + 2 b sqrt(P g x_mh) - b^2 (P sum_{i!=m} c_im (x_ih + x_il) + s^2)
  Eigen::MatrixXd leak = Eigen::MatrixXd::Zero(mrf, 2 * mrf);  // d u_m / d x, linear part
  std::vector<double> root(static_cast<std::size_t>(mrf));
  std::vector<double> offset(static_cast<std::size_t>(mrf));
  for (int m = 0; m < mrf; ++m) {
    const double b = beta[static_cast<std::size_t>(m)];
    root[static_cast<std::size_t>(m)] = 2.0 * b * std::sqrt(pr.pmax_w * pr.gains.own_sq(m, Role::kH));
    offset[static_cast<std::size_t>(m)] = 1.0 - b * b * pr.noise_w;
    for (int i = 0; i < mrf; ++i) {
      if (i == m) continue;
      const double c = -b * b * pr.pmax_w * pr.gains.cross_sq(i, user_index(m, Role::kH));
      leak(m, 2 * i) = c;
      leak(m, 2 * i + 1) = c;
    }
  }
  return [leak, root, offset, mrf](const Eigen::VectorXd& x) -> std::optional<ObjectiveValue> {
    ObjectiveValue o;
    o.gradient = Eigen::VectorXd::Zero(2 * mrf);
    o.hessian = Eigen::MatrixXd::Zero(2 * mrf, 2 * mrf);
    for (int m = 0; m < mrf; ++m) {
      const double xh = x(2 * m);
      if (!(xh > 0.0)) return std::nullopt;
      const double k = root[static_cast<std::size_t>(m)];
      const double sq = std::sqrt(xh);
      const double u = offset[static_cast<std::size_t>(m)] + k * sq + leak.row(m).dot(x);
      if (!(u >= kFpDomainGuard)) return std::nullopt;
      Eigen::VectorXd du = leak.row(m).transpose();
      du(2 * m) += 0.5 * k / sq;
      o.value += std::log(u) / kLn2;
      o.gradient += du / (u * kLn2);
      o.hessian -= du * du.transpose() / (u * u * kLn2);
      o.hessian(2 * m, 2 * m) += (-0.25 * k / (sq * xh)) / (u * kLn2);
    }
    return o;
  };
}

}  // namespace

PowerSolution solve_fp_inner(const std::vector<double>& beta, const PowerProblem& pr, const SolverOptions& opts,
                             const PowerAllocation* start) {
  if (static_cast<int>(beta.size()) != pr.gains.num_clusters()) {
    throw std::invalid_argument("solve_fp_inner: beta size does not match the cluster count");
  }
  const LinearConstraints cons = power_constraints(pr, Formulation::kMlb);
  const int mrf = pr.gains.num_clusters();
  const ConcaveObjective f = fp_surrogate(beta, pr);
  const Eigen::VectorXd centre = interior_point(cons, mrf);
  Eigen::VectorXd x0 = centre;
  if (start != nullptr) {
    // The previous iterate usually sits on active constraints; nudge it towards the interior point
    // while keeping the surrogate's log arguments positive.
    const Eigen::VectorXd xs = start->p / pr.pmax_w;
    for (double tau = 1e-6; tau < 1.0; tau *= 10.0) {
      const Eigen::VectorXd cand = (1.0 - tau) * xs + tau * centre;
      if ((cons.b - cons.a * cand).minCoeff() > 0.0 && f(cand)) {
        x0 = cand;
        break;
      }
    }
  }
  const SolveResult r = maximize_concave(f, cons, x0, opts);
  PowerSolution s = from_result(r, pr.pmax_w);
  s.objective = sum_rate_h(s.p, pr.gains, pr.noise_w);
  return s;
}

PowerAllocation find_feasible(const PowerProblem& pr, Formulation formulation) {
  const int mrf = pr.gains.num_clusters();
  const PowerAllocation uniform = PowerAllocation::uniform(mrf, pr.pmax_w);
  if (check_power_constraints(uniform, pr, formulation).max_violation <= 0.0) return uniform;
  const LinearConstraints cons = power_constraints(pr, formulation);
  return to_power(interior_point(cons, mrf), pr.pmax_w);
}

PowerSolution solve_mlb(const PowerProblem& pr, const SolverOptions& opts, const PowerAllocation* init) {
  const LinearConstraints cons = power_constraints(pr, Formulation::kMlb);
  const int mrf = pr.gains.num_clusters();
  Eigen::VectorXd x;
  if (init != nullptr) {
    x = init->p / pr.pmax_w;
    if (!((cons.b - cons.a * x).minCoeff() > 0.0)) {
      throw std::invalid_argument("solve_mlb: initial power allocation is not strictly feasible");
    }
  } else {
    x = interior_point(cons, mrf);
  }
  PowerSolution out;
  out.p = to_power(x, pr.pmax_w);
  double prev = sum_rate_h(out.p, pr.gains, pr.noise_w);
  out.trace.push_back(prev);
  for (int it = 1; it <= opts.max_outer_iterations; ++it) {
    const auto beta = optimal_beta(out.p, pr.gains, pr.noise_w);
    PowerSolution inner = solve_fp_inner(beta, pr, opts, &out.p);
    out.p = inner.p;
    out.kkt = inner.kkt;
    out.newton_steps += inner.newton_steps;
    out.outer_iterations = it;
    out.diagnostic = inner.diagnostic;
    const double val = inner.objective;
    out.trace.push_back(val);
    if (std::abs(val - prev) <= opts.outer_tolerance * std::max(1.0, std::abs(prev))) {
      out.converged = inner.converged;
      break;
    }
    prev = val;
  }
  if (!out.converged && out.diagnostic.empty()) out.diagnostic = "alternating loop hit the iteration cap";
  out.objective = out.trace.back();
  return out;
}

}  // namespace nfnoma
