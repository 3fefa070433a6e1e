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

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace nfnoma {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299792458.0;

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Uniform linear array centred at the origin along the x axis.
struct ArrayGeometry {
  int num_antennas = 1;
  double spacing = 0.005;     // metres
  double wavelength = 0.01;   // metres

  ArrayGeometry() = default;
  ArrayGeometry(int n, double spacing_m, double wavelength_m);

  /// Element spacing defaults to half a wavelength.
  static ArrayGeometry half_wavelength(int n, double wavelength_m);
  static ArrayGeometry from_carrier(int n, double carrier_hz);

  double aperture() const { return num_antennas * spacing; }
  double fraunhofer_distance() const;
};

/// Polar user position: radius from the array centre, angle from broadside.
class UserLocation {
 public:
  UserLocation(double radius_m, double angle_rad);

  double radius() const { return radius_; }
  double angle() const { return angle_; }

  friend bool operator==(const UserLocation&, const UserLocation&) = default;

 private:
  double radius_;
  double angle_;
};

struct ChannelVector {
  CVector entries;
  double path_gain = 0.0;
};

/// Offsets n - (N-1)/2 in units of the element spacing.
std::vector<double> element_offsets(const ArrayGeometry& geometry);

/// Distance from element n to the user (law of cosines).
double element_distance(const ArrayGeometry& geometry, const UserLocation& location, int n);

/// All N element distances; element_distance() for every n.
std::vector<double> element_distances(const ArrayGeometry& geometry, const UserLocation& location);

/// Spherical-wavefront array response with entries exp(-j 2pi/lambda r_n)/sqrt(N).
CVector near_field_steering(const ArrayGeometry& geometry, const UserLocation& location);

/// Planar-wavefront array response exp(j 2pi d n sin(theta)/lambda)/sqrt(N), n = 0..N-1.
/// Equals near_field_steering as radius -> infinity, up to a global phase.
CVector far_field_steering(const ArrayGeometry& geometry, double angle_rad);

/// Free-space amplitude gain lambda / (4 pi r).
double path_loss(double radius_m, double wavelength_m);

/// g = sqrt(N) a b(r, theta).
ChannelVector channel(const ArrayGeometry& geometry, const UserLocation& location);

}  // namespace nfnoma
