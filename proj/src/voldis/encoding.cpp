// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/encoding.hpp"

namespace voldis {

FourierEncoding::FourierEncoding(int n_features, double sigma, uint64_t seed)
    : n_(n_features), sigma_(sigma), seed_(seed), B_(n_features, 3) {
  require(n_features >= 1, "encoding: need at least one feature row");
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < 3; ++j)
      B_(i, j) = sigma_ * rng_normal(seed_, static_cast<uint64_t>(i) * 3 + j);
}

FourierEncoding::FourierEncoding(Eigen::MatrixXd B)
    : n_(static_cast<int>(B.rows())), sigma_(0.0), seed_(0), B_(std::move(B)) {
  require(n_ >= 1 && B_.cols() == 3, "encoding: B must be n x 3");
}

void FourierEncoding::encode(const Vec3& p, double* out) const {
  Eigen::VectorXd phase = 2.0 * M_PI * (B_ * p);
  for (int i = 0; i < n_; ++i) {
    out[i] = std::cos(phase[i]);
    out[n_ + i] = std::sin(phase[i]);
  }
}

std::vector<double> FourierEncoding::encode(const Vec3& p) const {
  std::vector<double> out(output_dim());
  encode(p, out.data());
  return out;
}

void FourierEncoding::encode_backward(const Vec3& p, const double* adj_out,
                                      Vec3* adj_p) const {
  Eigen::VectorXd phase = 2.0 * M_PI * (B_ * p);
  for (int i = 0; i < n_; ++i) {
    // d cos(phi)/dp = -sin(phi) * 2*pi*B_row; d sin(phi)/dp = cos(phi) * 2*pi*B_row
    double g = -std::sin(phase[i]) * adj_out[i] + std::cos(phase[i]) * adj_out[n_ + i];
    *adj_p += 2.0 * M_PI * g * B_.row(i).transpose();
  }
}

}  // namespace voldis
