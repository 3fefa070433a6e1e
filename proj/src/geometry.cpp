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

#include "nfnoma/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nfnoma {

ArrayGeometry::ArrayGeometry(int n, double spacing_m, double wavelength_m)
    : num_antennas(n), spacing(spacing_m), wavelength(wavelength_m) {
  if (n < 1) throw std::invalid_argument("ArrayGeometry: num_antennas must be >= 1");
  if (!(spacing_m > 0.0)) throw std::invalid_argument("ArrayGeometry: spacing must be > 0");
  if (!(wavelength_m > 0.0)) throw std::invalid_argument("ArrayGeometry: wavelength must be > 0");
}

ArrayGeometry ArrayGeometry::half_wavelength(int n, double wavelength_m) {
  return ArrayGeometry(n, wavelength_m / 2.0, wavelength_m);
}

ArrayGeometry ArrayGeometry::from_carrier(int n, double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("ArrayGeometry: carrier must be > 0");
  return half_wavelength(n, kSpeedOfLight / carrier_hz);
}

double ArrayGeometry::fraunhofer_distance() const {
  const double d = aperture();
  return 2.0 * d * d / wavelength;
}

UserLocation::UserLocation(double radius_m, double angle_rad) : radius_(radius_m), angle_(angle_rad) {
  if (!(radius_m > 0.0) || !std::isfinite(radius_m)) {
    throw std::invalid_argument("UserLocation: radius must be a positive finite value, got " +
                                std::to_string(radius_m));
  }
  const double half_pi = std::numbers::pi / 2.0;
  if (!(angle_rad > -half_pi && angle_rad < half_pi)) {
    throw std::invalid_argument("UserLocation: angle must lie in (-pi/2, pi/2), got " +
                                std::to_string(angle_rad));
  }
}

std::vector<double> element_offsets(const ArrayGeometry& geometry) {
  const int n = geometry.num_antennas;
  std::vector<double> out(static_cast<std::size_t>(n));
  const double centre = (n - 1) / 2.0;
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i - centre;
  return out;
}

namespace {

double distance_at_offset(double offset_m, const UserLocation& loc) {
  const double r = loc.radius();
  return std::sqrt(r * r + offset_m * offset_m - 2.0 * offset_m * r * std::sin(loc.angle()));
}

}  // namespace

double element_distance(const ArrayGeometry& geometry, const UserLocation& location, int n) {
  if (n < 0 || n >= geometry.num_antennas) {
    throw std::out_of_range("element_distance: index " + std::to_string(n) + " outside [0, " +
                            std::to_string(geometry.num_antennas) + ")");
  }
  const double offset = (n - (geometry.num_antennas - 1) / 2.0) * geometry.spacing;
  return distance_at_offset(offset, location);
}

std::vector<double> element_distances(const ArrayGeometry& geometry, const UserLocation& location) {
  std::vector<double> out(static_cast<std::size_t>(geometry.num_antennas));
  const double centre = (geometry.num_antennas - 1) / 2.0;
  for (int n = 0; n < geometry.num_antennas; ++n) {
    out[static_cast<std::size_t>(n)] = distance_at_offset((n - centre) * geometry.spacing, location);
  }
  return out;
}

CVector near_field_steering(const ArrayGeometry& geometry, const UserLocation& location) {
  const int n = geometry.num_antennas;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double k = 2.0 * std::numbers::pi / geometry.wavelength;
  const auto dist = element_distances(geometry, location);
  CVector b(n);
  for (int i = 0; i < n; ++i) b(i) = scale * std::polar(1.0, -k * dist[static_cast<std::size_t>(i)]);
  return b;
}

CVector far_field_steering(const ArrayGeometry& geometry, double angle_rad) {
  const int n = geometry.num_antennas;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  // Sign matches the large-radius limit of near_field_steering: r_n ~ r - delta_n d sin(theta).
  const double step = 2.0 * std::numbers::pi * geometry.spacing * std::sin(angle_rad) / geometry.wavelength;
  CVector b(n);
  for (int i = 0; i < n; ++i) b(i) = scale * std::polar(1.0, step * i);
  return b;
}

double path_loss(double radius_m, double wavelength_m) {
  if (!(radius_m > 0.0)) throw std::invalid_argument("path_loss: radius must be > 0");
  return wavelength_m / (4.0 * std::numbers::pi * radius_m);
}

ChannelVector channel(const ArrayGeometry& geometry, const UserLocation& location) {
  ChannelVector g;
  g.path_gain = path_loss(location.radius(), geometry.wavelength);
  g.entries = std::sqrt(static_cast<double>(geometry.num_antennas)) * g.path_gain *
              near_field_steering(geometry, location);
  return g;
}

}  // namespace nfnoma
