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

#include <span>
#include <stdexcept>
#include <string>

#include "nfnoma/analog.hpp"
#include "nfnoma/geometry.hpp"

namespace nfnoma {

/// Raised when a zero-forcing Gram matrix is singular or too poorly conditioned to invert;
/// in practice this means two clusters are not separable by their analog beams.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double condition_number)
      : std::runtime_error(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

inline constexpr double kMaxGramCondition = 1e12;

/// One unit-norm column per RF chain.
struct DigitalBeamformer {
  CMatrix columns;

  int num_rf() const { return static_cast<int>(columns.cols()); }
};

/// Stacks the analog beamformers column-wise into the N x M_RF matrix W^A.
CMatrix analog_matrix(std::span<const AnalogBeamformer> analog);

/// Row u holds g_u^H W^A for channel u.
CMatrix beamspace_channels(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog);

/// Zero-forcing on the columns of `equivalent` (M_RF x M_RF, column m = cluster m's beamspace
/// channel): W = G (G^H G)^{-1} with unit-norm columns.
DigitalBeamformer zf_digital(const CMatrix& equivalent);

enum class SvdConvention {
  kTranspose,  // SVD of G_m^T, as printed
  kConjugate,  // SVD of G_m^H; recovers the principal left singular direction of G_m
};

struct ClusterSvd {
  CVector combined;               // G_m u_1
  Eigen::Matrix2cd left;          // U, unitary, columns ordered by descending singular value
  Eigen::Vector2d singular_values;
};

/// Closed-form SVD of the 2 x M_RF matrix built from a cluster's two beamspace channels
/// (columns of `cluster`, H user first). u_1 is rotated so its first non-zero entry is real
/// and non-negative; equal singular values select e_1 (the H-user direction).
ClusterSvd svd_cluster(const CMatrix& cluster, SvdConvention convention = SvdConvention::kTranspose);

CVector svd_cluster_channel(const CMatrix& cluster, SvdConvention convention = SvdConvention::kTranspose);

/// Zero-forcing on the per-cluster SVD channels (columns of `combined`).
DigitalBeamformer svd_zf_digital(const CMatrix& combined);

// Whole-system designs from cluster-major channels (H then L per cluster).
// ZF on the H users' beamspace channels.
DigitalBeamformer zf_design(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog);
// ZF on the per-cluster SVD-combined channels.
DigitalBeamformer svd_zf_design(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog,
                                SvdConvention convention = SvdConvention::kTranspose);

}  // namespace nfnoma
