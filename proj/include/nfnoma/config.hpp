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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfnoma/montecarlo.hpp"
#include "nfnoma/scenario.hpp"

namespace nfnoma {

/// Schema or range violation in a run configuration. `field()` is a JSON-pointer-like path
/// such as "clusters[2].angle_deg".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Everything a `run` needs. Powers are kept in dBm as written; `scenario` carries the watt values.
struct RunConfig {
  ScenarioConfig scenario;
  double noise_dbm = -90.0;
  double pmax_dbm = 30.0;
  std::optional<double> matching_eta_dbm;  // unset: P_max
  SweepSpec sweep{SweepVariable::kPmaxDbm, {10.0, 14.0, 18.0, 22.0, 26.0, 30.0}};
  std::vector<Scheme> schemes = default_schemes(Framework::kSlb);
  std::string output_dir = "results";
  int trials = 50;
  std::uint64_t seed = 1;
  int threads = 1;

  MonteCarloOptions monte_carlo_options() const { return {trials, seed, threads}; }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
// "-" reads standard input.
RunConfig parse_config_file(const std::filesystem::path& path);

// Canonical JSON (sorted keys, two-space indent). parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace nfnoma
