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

#include "nfnoma/digital.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace nfnoma {

CMatrix analog_matrix(std::span<const AnalogBeamformer> analog) {
  if (analog.empty()) throw std::invalid_argument("analog_matrix: no beamformers");
  const Eigen::Index n = analog.front().size();
  CMatrix w(n, static_cast<Eigen::Index>(analog.size()));
  for (std::size_t m = 0; m < analog.size(); ++m) {
    if (analog[m].size() != n) throw std::invalid_argument("analog_matrix: beamformer lengths differ");
    w.col(static_cast<Eigen::Index>(m)) = analog[m].weights();
  }
  return w;
}

CMatrix beamspace_channels(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog) {
  const CMatrix wa = analog_matrix(analog);
  CMatrix out(static_cast<Eigen::Index>(channels.size()), wa.cols());
  for (std::size_t u = 0; u < channels.size(); ++u) {
    if (channels[u].entries.size() != wa.rows()) {
      throw std::invalid_argument("beamspace_channels: channel " + std::to_string(u) +
                                  " length does not match the analog beamformers");
    }
    out.row(static_cast<Eigen::Index>(u)) = channels[u].entries.adjoint() * wa;
  }
  return out;
}

DigitalBeamformer zf_digital(const CMatrix& equivalent) {
  if (equivalent.rows() != equivalent.cols() || equivalent.rows() == 0) {
    throw std::invalid_argument("zf_digital: expected a non-empty square equivalent channel matrix");
  }
  const CMatrix gram = equivalent.adjoint() * equivalent;
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(hi > 0.0) || !(cond <= kMaxGramCondition)) {
    throw IllConditionedError("zf_digital: Gram matrix condition number " + std::to_string(cond) +
                                  " exceeds " + std::to_string(kMaxGramCondition) +
                                  " (clusters not separable in beamspace)",
                              cond);
  }
  const Eigen::LLT<CMatrix> llt(gram);
  DigitalBeamformer out;
  out.columns = equivalent * llt.solve(CMatrix::Identity(gram.rows(), gram.cols()));
  for (Eigen::Index m = 0; m < out.columns.cols(); ++m) out.columns.col(m).normalize();
  return out;
}

namespace {

// Unit eigenvector of the 2x2 Hermitian [[a, b], [conj(b), c]] for eigenvalue `lambda`.
Eigen::Vector2cd hermitian_eigvec(double a, Complex b, double c, double lambda) {
  Eigen::Vector2cd v1(b, lambda - a);
  Eigen::Vector2cd v2(lambda - c, std::conj(b));
  Eigen::Vector2cd v = v1.norm() >= v2.norm() ? v1 : v2;
  return v / v.norm();
}

Eigen::Vector2cd canonical_phase(Eigen::Vector2cd v) {
  for (int i = 0; i < 2; ++i) {
    if (std::abs(v(i)) > 0.0) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = Complex(std::abs(v(i)), 0.0);
      break;
    }
  }
  return v;
}

}  // namespace

ClusterSvd svd_cluster(const CMatrix& cluster, SvdConvention convention) {
  if (cluster.cols() != 2 || cluster.rows() == 0) {
    throw std::invalid_argument("svd_cluster: expected an M_RF x 2 matrix");
  }
  if (cluster.norm() == 0.0) throw std::invalid_argument("svd_cluster: zero matrix");
  // Left singular vectors of X = G^T (or G^H) are eigenvectors of X X^H.
  const CMatrix x = convention == SvdConvention::kTranspose ? CMatrix(cluster.transpose())
                                                           : CMatrix(cluster.adjoint());
  const Eigen::Matrix2cd xxh = x * x.adjoint();
  const double a = xxh(0, 0).real();
  const double c = xxh(1, 1).real();
  const Complex b = xxh(0, 1);
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), std::abs(b));
  const double l1 = mean + radius;
  const double l2 = std::max(mean - radius, 0.0);

  Eigen::Vector2cd u1;
  Eigen::Vector2cd u2;
  if (std::abs(b) == 0.0) {
    const bool first = a >= c;
    u1 = first ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
    u2 = first ? Eigen::Vector2cd(0.0, 1.0) : Eigen::Vector2cd(1.0, 0.0);
  } else {
    u1 = canonical_phase(hermitian_eigvec(a, b, c, l1));
    // Orthogonal complement of u1 in C^2.
    u2 = canonical_phase(Eigen::Vector2cd(-std::conj(u1(1)), std::conj(u1(0))));
  }
  ClusterSvd out;
  out.left.col(0) = u1;
  out.left.col(1) = u2;
  out.singular_values = Eigen::Vector2d(std::sqrt(std::max(l1, 0.0)), std::sqrt(l2));
  out.combined = cluster * u1;
  return out;
}

CVector svd_cluster_channel(const CMatrix& cluster, SvdConvention convention) {
  return svd_cluster(cluster, convention).combined;
}

DigitalBeamformer svd_zf_digital(const CMatrix& combined) { return zf_digital(combined); }

namespace {

CMatrix cluster_columns(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog) {
  if (channels.size() != 2 * analog.size()) {
    throw std::invalid_argument("digital design: expected two channels per analog beamformer");
  }
  return beamspace_channels(channels, analog).adjoint();  // M_RF x 2M, column u = W^H g_u
}

}  // namespace

DigitalBeamformer zf_design(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog) {
  const CMatrix cols = cluster_columns(channels, analog);
  const Eigen::Index m = cols.rows();
  CMatrix g(m, m);
  for (Eigen::Index i = 0; i < m; ++i) g.col(i) = cols.col(2 * i);
  return zf_digital(g);
}

DigitalBeamformer svd_zf_design(std::span<const ChannelVector> channels, std::span<const AnalogBeamformer> analog,
                                SvdConvention convention) {
  const CMatrix cols = cluster_columns(channels, analog);
  const Eigen::Index m = cols.rows();
  CMatrix combined(m, m);
  for (Eigen::Index i = 0; i < m; ++i) combined.col(i) = svd_cluster_channel(cols.middleCols(2 * i, 2), convention);
  return svd_zf_digital(combined);
}

}  // namespace nfnoma
