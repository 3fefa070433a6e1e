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

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "nfnoma/geometry.hpp"

namespace nfnoma {

/// Phase-shifter weights; every entry has modulus 1/sqrt(N).
class AnalogBeamformer {
 public:
  explicit AnalogBeamformer(CVector weights);

  const CVector& weights() const { return weights_; }
  int size() const { return static_cast<int>(weights_.size()); }

 private:
  CVector weights_;
};

/// Contiguous sub-array partition: elements [0, num_h) serve the H-QoS user, the rest the L-QoS user.
struct AntennaSplit {
  int num_h = 0;
  int num_l = 0;

  /// Throws std::invalid_argument unless num_h + num_l == num_antennas and both >= min_antennas.
  void validate(int num_antennas, int min_antennas = 1) const;

  friend bool operator==(const AntennaSplit&, const AntennaSplit&) = default;
};

AnalogBeamformer slb_beamformer(const ArrayGeometry& geometry, const UserLocation& focus);

/// Beam-splitting beamformer focused on both cluster users.
AnalogBeamformer mlb_beamformer(const ArrayGeometry& geometry, const AntennaSplit& split,
                                const UserLocation& loc_h, const UserLocation& loc_l,
                                int min_antennas = 1);

/// Far-field counterparts used by the benchmark schemes: depend on angles only.
AnalogBeamformer ff_beamformer(const ArrayGeometry& geometry, double angle_rad);
AnalogBeamformer mb_ff_beamformer(const ArrayGeometry& geometry, const AntennaSplit& split,
                                  double angle_h, double angle_l, int min_antennas = 1);

/// Normalised array gain |b(probe)^H w| in [0, 1].
double array_gain(const AnalogBeamformer& bf, const ArrayGeometry& geometry, const UserLocation& probe);

struct FocusGains {
  double at_h = 0.0;
  double at_l = 0.0;
};

/// Closed-form gains of the beam-splitting beamformer at its two foci, built from the
/// cross phasor sums between the two focal distance profiles.
FocusGains mlb_focus_gains(const ArrayGeometry& geometry, const AntennaSplit& split,
                           const UserLocation& loc_h, const UserLocation& loc_l);

struct SplitGainBound {
  bool holds = false;
  double mlb_gain_h = 0.0;
  double mlb_gain_l = 0.0;
  double slb_gain_h = 0.0;
};

/// Checks max_k |b(loc_k)^H w_mlb| <= |b(loc_h)^H w_slb(loc_h)|.
SplitGainBound verify_split_gain_bound(const ArrayGeometry& geometry, const AntennaSplit& split,
                          const UserLocation& loc_h, const UserLocation& loc_l);

struct GainMapGrid {
  double radius_min = 5.0;
  double radius_max = 100.0;
  double angle_min = -std::numbers::pi / 3.0;
  double angle_max = std::numbers::pi / 3.0;
  int radial_points = 400;
  int angular_points = 400;
};

struct GainMap {
  std::vector<double> radii;   // metres
  std::vector<double> angles;  // radians
  std::vector<double> values;  // row-major, radii outer

  double at(std::size_t ri, std::size_t ai) const { return values[ri * angles.size() + ai]; }
};

/// Rasterised array gain on a polar grid. With several beamformers each cell holds the
/// largest gain over the set, which is how multi-cluster maps are drawn.
GainMap gain_map(std::span<const AnalogBeamformer> beams, const ArrayGeometry& geometry,
                 const GainMapGrid& grid);
GainMap gain_map(const AnalogBeamformer& bf, const ArrayGeometry& geometry, const GainMapGrid& grid);

/// Header row of angles in degrees, first column radii in metres, 9 significant digits.
void write_gain_map_csv(std::ostream& out, const GainMap& map);

}  // namespace nfnoma
