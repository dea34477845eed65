// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/common.hpp"

#include <vector>

namespace voldis {

// Random Fourier features: gamma(p) = [cos(2*pi*B*p), sin(2*pi*B*p)],
// B an n x 3 matrix with N(0, sigma^2) entries. B is fixed at construction
// and never trained; it is reproduced from (n, sigma, seed).
class FourierEncoding {
 public:
  FourierEncoding(int n_features, double sigma, uint64_t seed);
  // Explicit frequency matrix (n x 3).
  explicit FourierEncoding(Eigen::MatrixXd B);

  int n_features() const { return n_; }
  int output_dim() const { return 2 * n_; }
  double sigma() const { return sigma_; }
  uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& B() const { return B_; }

  // out has output_dim() entries: cos block first, then sin block.
  void encode(const Vec3& p, double* out) const;
  std::vector<double> encode(const Vec3& p) const;

  // Chain rule into the input point: given d(loss)/d(encoding), accumulate
  // d(loss)/dp.
  void encode_backward(const Vec3& p, const double* adj_out, Vec3* adj_p) const;

 private:
  int n_;
  double sigma_;
  uint64_t seed_;
  Eigen::MatrixXd B_;  // n x 3
};

}  // namespace voldis
