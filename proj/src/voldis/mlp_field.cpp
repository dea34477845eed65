// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/mlp_field.hpp"

namespace voldis {

namespace {

using ConstMat = Eigen::Map<const Eigen::MatrixXd>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutMat = Eigen::Map<Eigen::MatrixXd>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

}  // namespace

struct MlpField::Scratch {
  std::vector<Eigen::VectorXd> h;      // h[0] = encoded position, h[k+1] post-ReLU
  std::vector<Eigen::VectorXd> pre;    // pre-activation per trunk layer
  Eigen::VectorXd color_in;            // [trunk out; encoded direction]
  Eigen::VectorXd color_pre, color_h;  // color hidden layer
  Eigen::VectorXd rgb_raw;
  double density_pre = 0.0;
};

MlpField::MlpField(const MlpConfig& config)
    : config_(config),
      pos_enc_(config.pos_features, config.pos_sigma, hash_combine(config.seed, 1)),
      dir_enc_(std::max(config.dir_features, 1), config.dir_sigma,
               hash_combine(config.seed, 2)) {
  require(config.hidden_layers >= 1 && config.width >= 1 && config.color_width >= 1,
          "mlp field: layer sizes must be positive");
  require(config.init_density > 0.0, "mlp field: init density must be > 0");

  size_t off = 0;
  auto add_block = [&off](int rows, int cols) {
    Block b;
    b.rows = rows;
    b.cols = cols;
    b.weight_off = off;
    off += static_cast<size_t>(rows) * cols;
    b.bias_off = off;
    off += rows;
    return b;
  };

  int in = pos_enc_.output_dim();
  for (int l = 0; l < config.hidden_layers; ++l) {
    trunk_.push_back(add_block(config.width, in));
    in = config.width;
  }
  density_head_ = add_block(1, config.width);
  int color_in = config.width + (config.view_dependent ? dir_enc_.output_dim() : 0);
  color_hidden_ = add_block(config.color_width, color_in);
  color_out_ = add_block(3, config.color_width);

  params_.resize(off);
  uint64_t init_seed = hash_combine(config.seed, 3);
  auto init_block = [&](const Block& b) {
    double bound = 1.0 / std::sqrt(static_cast<double>(b.cols));
    size_t n = static_cast<size_t>(b.rows) * b.cols;
    for (size_t i = 0; i < n; ++i)
      params_[b.weight_off + i] = bound * (2.0 * rng_uniform(init_seed, b.weight_off + i) - 1.0);
    for (int i = 0; i < b.rows; ++i) params_[b.bias_off + i] = 0.0;
  };
  for (const Block& b : trunk_) init_block(b);
  init_block(density_head_);
  init_block(color_hidden_);
  init_block(color_out_);
  params_[density_head_.bias_off] = softplus_inv(config.init_density);
}

void MlpField::forward(const Vec3& p, const Vec3& d, Scratch& s) const {
  const double* P = params_.data();
  int L = config_.hidden_layers;
  s.h.resize(L + 1);
  s.pre.resize(L);
  s.h[0].resize(pos_enc_.output_dim());
  pos_enc_.encode(p, s.h[0].data());

  for (int l = 0; l < L; ++l) {
    const Block& b = trunk_[l];
    ConstMat W(P + b.weight_off, b.rows, b.cols);
    ConstVec bias(P + b.bias_off, b.rows);
    s.pre[l] = W * s.h[l] + bias;
    s.h[l + 1] = s.pre[l].cwiseMax(0.0);
  }

  ConstMat wd(P + density_head_.weight_off, 1, density_head_.cols);
  s.density_pre = (wd * s.h[L])(0) + P[density_head_.bias_off];

  s.color_in.resize(color_hidden_.cols);
  s.color_in.head(config_.width) = s.h[L];
  if (config_.view_dependent)
    dir_enc_.encode(d, s.color_in.data() + config_.width);

  ConstMat Wc(P + color_hidden_.weight_off, color_hidden_.rows, color_hidden_.cols);
  ConstVec bc(P + color_hidden_.bias_off, color_hidden_.rows);
  s.color_pre = Wc * s.color_in + bc;
  s.color_h = s.color_pre.cwiseMax(0.0);

  ConstMat Wo(P + color_out_.weight_off, 3, color_out_.cols);
  ConstVec bo(P + color_out_.bias_off, 3);
  s.rgb_raw = Wo * s.color_h + bo;
}

FieldOutput MlpField::eval(const Vec3& position, const Vec3& direction) const {
  Scratch s;
  forward(position, direction, s);
  FieldOutput out;
  out.density = softplus(s.density_pre);
  out.color = Vec3(sigmoid(s.rgb_raw[0]), sigmoid(s.rgb_raw[1]), sigmoid(s.rgb_raw[2]));
  check_finite(out, "mlp field");
  return out;
}

void MlpField::eval_backward(std::span<const Vec3> positions,
                             std::span<const Vec3> directions,
                             std::span<const FieldOutput> adjoints,
                             std::span<double> grad) const {
  require(positions.size() == adjoints.size(), "mlp backward: batch lengths differ");
  require(directions.empty() || directions.size() == positions.size(),
          "mlp backward: batch lengths differ");
  require(grad.size() == params_.size(), "mlp backward: gradient buffer size mismatch");

  const double* P = params_.data();
  double* G = grad.data();
  int L = config_.hidden_layers;
  Scratch s;

  for (size_t i = 0; i < positions.size(); ++i) {
    Vec3 dir = directions.empty() ? Vec3::Zero() : directions[i];
    forward(positions[i], dir, s);

    // Color head.
    Eigen::Vector3d g_rgb;
    for (int c = 0; c < 3; ++c)
      g_rgb[c] = adjoints[i].color[c] * sigmoid_grad(s.rgb_raw[c]);
    MutMat gWo(G + color_out_.weight_off, 3, color_out_.cols);
    MutVec gbo(G + color_out_.bias_off, 3);
    gWo.noalias() += g_rgb * s.color_h.transpose();
    gbo += g_rgb;
    ConstMat Wo(P + color_out_.weight_off, 3, color_out_.cols);
    Eigen::VectorXd g_ch = Wo.transpose() * g_rgb;
    for (int k = 0; k < g_ch.size(); ++k)
      if (s.color_pre[k] <= 0.0) g_ch[k] = 0.0;

    MutMat gWc(G + color_hidden_.weight_off, color_hidden_.rows, color_hidden_.cols);
    MutVec gbc(G + color_hidden_.bias_off, color_hidden_.rows);
    gWc.noalias() += g_ch * s.color_in.transpose();
    gbc += g_ch;
    ConstMat Wc(P + color_hidden_.weight_off, color_hidden_.rows, color_hidden_.cols);
    Eigen::VectorXd g_cin = Wc.transpose() * g_ch;
    Eigen::VectorXd g_trunk = g_cin.head(config_.width);

    // Density head; softplus' = sigmoid.
    double g_d = adjoints[i].density * sigmoid(s.density_pre);
    MutMat gwd(G + density_head_.weight_off, 1, density_head_.cols);
    MutVec gbd(G + density_head_.bias_off, 1);
    gwd.noalias() += g_d * s.h[L].transpose();
    gbd[0] += g_d;
    ConstMat wd(P + density_head_.weight_off, 1, density_head_.cols);
    g_trunk += wd.transpose() * g_d;

    // Trunk, back to front. The encoding matrix B is fixed, so the chain
    // stops at h[0].
    for (int l = L - 1; l >= 0; --l) {
      for (int k = 0; k < g_trunk.size(); ++k)
        if (s.pre[l][k] <= 0.0) g_trunk[k] = 0.0;
      const Block& b = trunk_[l];
      MutMat gW(G + b.weight_off, b.rows, b.cols);
      MutVec gb(G + b.bias_off, b.rows);
      gW.noalias() += g_trunk * s.h[l].transpose();
      gb += g_trunk;
      if (l > 0) {
        ConstMat W(P + b.weight_off, b.rows, b.cols);
        g_trunk = W.transpose() * g_trunk;
      }
    }
  }
}

std::unique_ptr<RadianceField> MlpField::clone() const {
  return std::make_unique<MlpField>(*this);
}

}  // namespace voldis
