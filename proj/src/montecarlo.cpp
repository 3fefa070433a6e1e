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

#include "nfnoma/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "nfnoma/format.hpp"
#include "nfnoma/log.hpp"

namespace nfnoma {

namespace {

struct SchemeInfo {
  Scheme scheme;
  const char* name;
};

constexpr SchemeInfo kSchemes[] = {
    {Scheme::kSlbNfNoma, "slb_nf_noma"},          {Scheme::kNfOma, "nf_oma"},
    {Scheme::kFfNomaOma, "ff_noma_oma"},          {Scheme::kMlbNfNoma, "mlb_nf_noma"},
    {Scheme::kRandMlbNfNoma, "rand_mlb_nf_noma"}, {Scheme::kFixedMlbNfNoma, "fixed_mlb_nf_noma"},
    {Scheme::kMbFfNoma, "mb_ff_noma"},
};

}  // namespace

std::string scheme_name(Scheme scheme) {
  for (const auto& s : kSchemes) {
    if (s.scheme == scheme) return s.name;
  }
  throw std::invalid_argument("scheme_name: unknown scheme");
}

std::optional<Scheme> parse_scheme(const std::string& name) {
  for (const auto& s : kSchemes) {
    if (name == s.name) return s.scheme;
  }
  return std::nullopt;
}

std::vector<Scheme> default_schemes(Framework framework) {
  if (framework == Framework::kSlb) return {Scheme::kSlbNfNoma, Scheme::kFfNomaOma, Scheme::kNfOma};
  return {Scheme::kMlbNfNoma, Scheme::kRandMlbNfNoma, Scheme::kFixedMlbNfNoma, Scheme::kMbFfNoma, Scheme::kNfOma};
}

std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::kPmaxDbm: return "pmax_dbm";
    case SweepVariable::kNumAntennas: return "num_antennas";
    case SweepVariable::kRateLMin: return "rate_l_min";
  }
  throw std::invalid_argument("sweep_variable_name: unknown variable");
}

std::optional<SweepVariable> parse_sweep_variable(const std::string& name) {
  for (auto v : {SweepVariable::kPmaxDbm, SweepVariable::kNumAntennas, SweepVariable::kRateLMin}) {
    if (name == sweep_variable_name(v)) return v;
  }
  return std::nullopt;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepVariable variable, double value) {
  ScenarioConfig c = base;
  switch (variable) {
    case SweepVariable::kPmaxDbm:
      c.pmax_w = dbm_to_watts(value);
      break;
    case SweepVariable::kNumAntennas:
      if (value != std::floor(value) || value < 2.0 || value > 1e6) {
        throw std::invalid_argument("sweep.values: num_antennas must be integers in [2, 1e6]");
      }
      c.num_antennas = static_cast<int>(value);
      break;
    case SweepVariable::kRateLMin:
      c.rate_l_min = value;
      break;
  }
  c.validate();
  return c;
}

TrialResult run_scheme(Scheme scheme, const std::vector<ClusterUsers>& clusters, const ScenarioConfig& config,
                       Rng& rng) {
  switch (scheme) {
    case Scheme::kSlbNfNoma: return run_slb_pipeline(clusters, config);
    case Scheme::kNfOma: return run_nf_oma_baseline(clusters, config, rng);
    case Scheme::kFfNomaOma: return run_ff_noma_oma_baseline(clusters, config);
    case Scheme::kMlbNfNoma: return run_mlb_pipeline(clusters, config);
    case Scheme::kRandMlbNfNoma: return run_rand_mlb_baseline(clusters, config, rng);
    case Scheme::kFixedMlbNfNoma: return run_fixed_mlb_baseline(clusters, config);
    case Scheme::kMbFfNoma: return run_mb_ff_noma_baseline(clusters, config);
  }
  throw std::invalid_argument("run_scheme: unknown scheme");
}

SampleStats sample_stats(const std::vector<double>& values) {
  SampleStats s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) {
    s.mean = std::nan("");
    s.stderr_ = std::nan("");
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (s.n - 1) / s.n);
  }
  return s;
}

MonteCarloOutput monte_carlo(const ScenarioConfig& base, const SweepSpec& sweep, const std::vector<Scheme>& schemes,
                             const MonteCarloOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  if (options.threads < 1) throw std::invalid_argument("monte_carlo: threads must be >= 1");
  if (sweep.values.empty()) throw std::invalid_argument("monte_carlo: empty sweep");
  if (schemes.empty()) throw std::invalid_argument("monte_carlo: no schemes");
  std::vector<ScenarioConfig> configs;
  for (double v : sweep.values) configs.push_back(apply_sweep(base, sweep.variable, v));

  const std::size_t points = configs.size();
  const auto trials = static_cast<std::size_t>(options.trials);
  MonteCarloOutput out;
  out.results.assign(points, std::vector<std::vector<TrialResult>>(schemes.size(), std::vector<TrialResult>(trials)));

  // One work item per (sweep point, trial). Every random draw depends only on (seed, trial,
  // stream tag), so the thread count cannot change any result.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t item = next.fetch_add(1);
      if (item >= points * trials) return;
      const std::size_t pi = item / trials;
      const std::size_t t = item % trials;
      try {
        Rng drop_rng(options.seed, t, 0);
        const auto clusters = drop_scenario(configs[pi], drop_rng);
        for (std::size_t s = 0; s < schemes.size(); ++s) {
          Rng scheme_rng(options.seed, t, 1 + static_cast<std::uint64_t>(schemes[s]));
          TrialResult r = run_scheme(schemes[s], clusters, configs[pi], scheme_rng);
          if (!r.feasible) log_message(LogLevel::kDebug, "trial " + std::to_string(t) + " " + r.scheme + ": " + r.diagnostic);
          out.results[pi][s][t] = std::move(r);
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(points * trials);
        return;
      }
    }
  };
  const int nthreads = std::min<int>(options.threads, static_cast<int>(points * trials));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  const std::string var = sweep_variable_name(sweep.variable);
  for (std::size_t pi = 0; pi < points; ++pi) {
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      const auto& rs = out.results[pi][s];
      for (const char* metric : kMetrics) {
        std::vector<double> v;
        for (const auto& r : rs) {
          if (!r.feasible) continue;
          const std::string m = metric;
          v.push_back(m == "sum_rate_h" ? r.sum_rate_h : m == "sum_rate_l" ? r.sum_rate_l : r.total_interference_w);
        }
        const SampleStats st = sample_stats(v);
        out.rows.push_back({var, sweep.values[pi], scheme_name(schemes[s]), metric, st.mean, st.stderr_, st.n,
                            static_cast<int>(rs.size())});
      }
    }
  }
  return out;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
  out << "sweep_var,value,scheme,metric,mean,stderr,n_feasible,n_total\n";
  for (const auto& r : rows) {
    out << r.sweep_var << ',' << format_number(r.value) << ',' << r.scheme << ',' << r.metric << ','
        << format_number(r.mean) << ',' << format_number(r.stderr_) << ',' << r.n_feasible << ',' << r.n_total
        << '\n';
  }
}

}  // namespace nfnoma
