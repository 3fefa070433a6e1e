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

#include "nfnoma/analog.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nfnoma/format.hpp"

namespace nfnoma {

namespace {

constexpr double kModulusTolerance = 1e-12;

double wavenumber(const ArrayGeometry& g) { return 2.0 * std::numbers::pi / g.wavelength; }

CVector phase_profile(const ArrayGeometry& geometry, const std::vector<double>& distances) {
  const int n = geometry.num_antennas;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double k = wavenumber(geometry);
  CVector w(n);
  for (int i = 0; i < n; ++i) w(i) = scale * std::polar(1.0, -k * distances[static_cast<std::size_t>(i)]);
  return w;
}

}  // namespace

AnalogBeamformer::AnalogBeamformer(CVector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw std::invalid_argument("AnalogBeamformer: empty weight vector");
  const double target = 1.0 / std::sqrt(static_cast<double>(weights_.size()));
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (std::abs(std::abs(weights_(i)) - target) > kModulusTolerance) {
      throw std::invalid_argument("AnalogBeamformer: entry " + std::to_string(i) +
                                  " violates the constant-modulus constraint");
    }
  }
}

void AntennaSplit::validate(int num_antennas, int min_antennas) const {
  const int floor = std::max(min_antennas, 1);
  if (num_h + num_l != num_antennas) {
    throw std::invalid_argument("AntennaSplit: " + std::to_string(num_h) + " + " + std::to_string(num_l) +
                                " != " + std::to_string(num_antennas) + " antennas");
  }
  if (num_h < floor || num_l < floor) {
    throw std::invalid_argument("AntennaSplit: (" + std::to_string(num_h) + ", " + std::to_string(num_l) +
                                ") below the minimum of " + std::to_string(floor) + " antennas per user");
  }
}

AnalogBeamformer slb_beamformer(const ArrayGeometry& geometry, const UserLocation& focus) {
  return AnalogBeamformer(phase_profile(geometry, element_distances(geometry, focus)));
}

AnalogBeamformer mlb_beamformer(const ArrayGeometry& geometry, const AntennaSplit& split,
                                const UserLocation& loc_h, const UserLocation& loc_l, int min_antennas) {
  split.validate(geometry.num_antennas, min_antennas);
  auto dist = element_distances(geometry, loc_h);
  const auto dist_l = element_distances(geometry, loc_l);
  std::copy(dist_l.begin() + split.num_h, dist_l.end(), dist.begin() + split.num_h);
  return AnalogBeamformer(phase_profile(geometry, dist));
}

AnalogBeamformer ff_beamformer(const ArrayGeometry& geometry, double angle_rad) {
  return AnalogBeamformer(far_field_steering(geometry, angle_rad));
}

AnalogBeamformer mb_ff_beamformer(const ArrayGeometry& geometry, const AntennaSplit& split, double angle_h,
                                  double angle_l, int min_antennas) {
  split.validate(geometry.num_antennas, min_antennas);
  CVector w = far_field_steering(geometry, angle_h);
  w.tail(split.num_l) = far_field_steering(geometry, angle_l).tail(split.num_l);
  return AnalogBeamformer(std::move(w));
}

double array_gain(const AnalogBeamformer& bf, const ArrayGeometry& geometry, const UserLocation& probe) {
  if (bf.size() != geometry.num_antennas) {
    throw std::invalid_argument("array_gain: beamformer length does not match the array");
  }
  const CVector b = near_field_steering(geometry, probe);
  return std::min(1.0, std::abs(b.dot(bf.weights())));
}

FocusGains mlb_focus_gains(const ArrayGeometry& geometry, const AntennaSplit& split, const UserLocation& loc_h,
                           const UserLocation& loc_l) {
  split.validate(geometry.num_antennas);
  // Per-element phasors come from the steering vectors so that the rounding of k * r_n is the
  // same here as in a direct gain evaluation.
  const CVector bh = near_field_steering(geometry, loc_h);
  const CVector bl = near_field_steering(geometry, loc_l);
  const double n_total = geometry.num_antennas;
  const Complex cross_h = n_total * bl.head(split.num_h).dot(bh.head(split.num_h));  // H sub-array seen from L
  const Complex cross_l = n_total * bh.tail(split.num_l).dot(bl.tail(split.num_l));  // L sub-array seen from H
  const double inv_n = 1.0 / geometry.num_antennas;
  return {inv_n * std::abs(static_cast<double>(split.num_h) + cross_l),
          inv_n * std::abs(static_cast<double>(split.num_l) + cross_h)};
}

SplitGainBound verify_split_gain_bound(const ArrayGeometry& geometry, const AntennaSplit& split, const UserLocation& loc_h,
                          const UserLocation& loc_l) {
  const auto mlb = mlb_beamformer(geometry, split, loc_h, loc_l);
  SplitGainBound out;
  out.mlb_gain_h = array_gain(mlb, geometry, loc_h);
  out.mlb_gain_l = array_gain(mlb, geometry, loc_l);
  out.slb_gain_h = array_gain(slb_beamformer(geometry, loc_h), geometry, loc_h);
  // Rounding slack only: both sides are sums of N unit phasors.
  out.holds = std::max(out.mlb_gain_h, out.mlb_gain_l) <= out.slb_gain_h + 1e-12;
  return out;
}

GainMap gain_map(std::span<const AnalogBeamformer> beams, const ArrayGeometry& geometry, const GainMapGrid& grid) {
  if (beams.empty()) throw std::invalid_argument("gain_map: no beamformers");
  if (grid.radial_points < 1 || grid.angular_points < 1) throw std::invalid_argument("gain_map: empty grid");
  if (!(grid.radius_min > 0.0) || grid.radius_max < grid.radius_min || grid.angle_max < grid.angle_min) {
    throw std::invalid_argument("gain_map: invalid grid ranges");
  }
  auto axis = [](double lo, double hi, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      v[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    }
    return v;
  };
  GainMap map;
  map.radii = axis(grid.radius_min, grid.radius_max, grid.radial_points);
  map.angles = axis(grid.angle_min, grid.angle_max, grid.angular_points);
  map.values.assign(map.radii.size() * map.angles.size(), 0.0);

  CMatrix weights(geometry.num_antennas, static_cast<Eigen::Index>(beams.size()));
  for (std::size_t b = 0; b < beams.size(); ++b) {
    if (beams[b].size() != geometry.num_antennas) {
      throw std::invalid_argument("gain_map: beamformer length does not match the array");
    }
    weights.col(static_cast<Eigen::Index>(b)) = beams[b].weights();
  }
  for (std::size_t ri = 0; ri < map.radii.size(); ++ri) {
    for (std::size_t ai = 0; ai < map.angles.size(); ++ai) {
      const CVector b = near_field_steering(geometry, UserLocation(map.radii[ri], map.angles[ai]));
      const Eigen::VectorXcd proj = weights.adjoint() * b;
      map.values[ri * map.angles.size() + ai] = std::min(1.0, proj.cwiseAbs().maxCoeff());
    }
  }
  return map;
}

GainMap gain_map(const AnalogBeamformer& bf, const ArrayGeometry& geometry, const GainMapGrid& grid) {
  return gain_map(std::span<const AnalogBeamformer>(&bf, 1), geometry, grid);
}

void write_gain_map_csv(std::ostream& out, const GainMap& map) {
  out << "radius_m";
  for (double a : map.angles) out << ',' << format_number(rad_to_deg(a));
  out << '\n';
  for (std::size_t ri = 0; ri < map.radii.size(); ++ri) {
    out << format_number(map.radii[ri]);
    for (std::size_t ai = 0; ai < map.angles.size(); ++ai) out << ',' << format_number(map.at(ri, ai));
    out << '\n';
  }
}

}  // namespace nfnoma
