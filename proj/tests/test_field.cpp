// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/mlp_field.hpp"
#include "voldis/voxel_field.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace voldis;
using voldis::testing::rel_err;

namespace {

VoxelGridConfig small_voxel() {
  VoxelGridConfig c;
  c.nx = 4;
  c.ny = 3;
  c.nz = 3;
  c.bbox_min = Vec3(-1, -1, -1);
  c.bbox_max = Vec3(1, 1, 1);
  return c;
}

MlpConfig small_mlp() {
  MlpConfig c;
  c.hidden_layers = 2;
  c.width = 16;
  c.color_width = 8;
  c.pos_features = 8;
  c.dir_features = 4;
  c.seed = 3;
  return c;
}

// d(sum <adjoint, output>)/d(param i) by central differences.
double field_fd(RadianceField& field, size_t i, const std::vector<Vec3>& pos,
                const std::vector<Vec3>& dir, const std::vector<FieldOutput>& adj,
                double h = 1e-4) {
  auto objective = [&](double x) {
    double saved = field.params()[i];
    field.params()[i] = x;
    double s = 0.0;
    for (size_t k = 0; k < pos.size(); ++k) {
      FieldOutput out = field.eval(pos[k], dir[k]);
      s += adj[k].color.dot(out.color) + adj[k].density * out.density;
    }
    field.params()[i] = saved;
    return s;
  };
  double x = field.params()[i];
  return (objective(x + h) - objective(x - h)) / (2.0 * h);
}

void randomize(RadianceField& field, uint64_t seed, double scale) {
  auto p = field.params();
  for (size_t i = 0; i < p.size(); ++i)
    p[i] += scale * (rng_uniform(seed, i) * 2.0 - 1.0);
}

void gradient_suite(RadianceField& field, int n_coords, uint64_t seed) {
  std::vector<Vec3> pos, dir;
  std::vector<FieldOutput> adj;
  for (int k = 0; k < 12; ++k) {
    pos.emplace_back(rng_uniform(seed, k, 1) * 1.8 - 0.9, rng_uniform(seed, k, 2) * 1.8 - 0.9,
                     rng_uniform(seed, k, 3) * 1.8 - 0.9);
    dir.push_back(Vec3(rng_uniform(seed, k, 4) - 0.5, rng_uniform(seed, k, 5) - 0.5,
                       rng_uniform(seed, k, 6) - 0.5)
                      .normalized());
    FieldOutput a;
    a.color = Vec3(rng_uniform(seed, k, 7), rng_uniform(seed, k, 8), rng_uniform(seed, k, 9)) *
                  2.0 -
              Vec3::Ones();
    a.density = rng_uniform(seed, k, 10) * 2.0 - 1.0;
    adj.push_back(a);
  }

  std::vector<double> grad(field.param_count(), 0.0);
  field.eval_backward(pos, dir, adj, grad);

  int checked = 0;
  for (int t = 0; t < n_coords * 20 && checked < n_coords; ++t) {
    size_t i = static_cast<size_t>(rng_uniform(seed, 0x77, t) * field.param_count());
    i = std::min(i, field.param_count() - 1);
    double fd = field_fd(field, i, pos, dir, adj);
    if (std::abs(fd) < 1e-7 && std::abs(grad[i]) < 1e-7) continue;  // silent coordinate
    CHECK(rel_err(grad[i], fd) <= 1e-3);
    ++checked;
  }
  CHECK(checked >= n_coords / 2);
}

}  // namespace

TEST_CASE("voxel query at a vertex returns the squashed raw value") {
  VoxelGridField field(small_voxel());
  field.raw_at(1, 2, 1, 0) = 0.7;
  field.raw_at(1, 2, 1, 3) = 0.4;
  // Vertex (1,2,1) sits at bbox_min + (1/3*2, 2/2*2, 1/2*2).
  Vec3 p(-1.0 + 2.0 / 3.0, 1.0, 0.0);
  FieldOutput out = field.eval(p, Vec3::UnitZ());
  CHECK(out.color[0] == doctest::Approx(sigmoid(0.7)).epsilon(1e-12));
  CHECK(out.density == doctest::Approx(softplus(0.4)).epsilon(1e-12));
}

TEST_CASE("constant voxel grid is constant on the interior") {
  VoxelGridField field(small_voxel());
  FieldOutput ref = field.eval(Vec3(0.1, 0.2, -0.3), Vec3::UnitZ());
  for (int k = 0; k < 20; ++k) {
    Vec3 p(rng_uniform(1, k, 0) * 1.9 - 0.95, rng_uniform(1, k, 1) * 1.9 - 0.95,
           rng_uniform(1, k, 2) * 1.9 - 0.95);
    FieldOutput out = field.eval(p, Vec3::UnitZ());
    // Trilinear weights sum to one, so a constant grid reproduces exactly.
    CHECK(out.density == doctest::Approx(ref.density).epsilon(1e-12));
    CHECK(out.color[1] == doctest::Approx(ref.color[1]).epsilon(1e-12));
  }
}

TEST_CASE("voxel interpolation matches a brute-force trilerp oracle") {
  VoxelGridConfig cfg = small_voxel();
  VoxelGridField field(cfg);
  for (int z = 0; z < cfg.nz; ++z)
    for (int y = 0; y < cfg.ny; ++y)
      for (int x = 0; x < cfg.nx; ++x)
        for (int ch = 0; ch < 4; ++ch)
          field.raw_at(x, y, z, ch) = rng_uniform(5, x, y * 16 + z * 256 + ch) * 4.0 - 2.0;

  // Midpoint between vertices (0,0,0) and (1,0,0), plus random interior points.
  auto check_point = [&](double fx, double fy, double fz, int x0, int y0, int z0) {
    double corners[8];
    for (int k = 0; k < 8; ++k)
      corners[k] = field.raw_at(x0 + (k & 1), y0 + ((k >> 1) & 1), z0 + ((k >> 2) & 1), 3);
    double expected_raw = voldis::testing::brute_force_trilerp(corners, fx, fy, fz);
    Vec3 cell_size((2.0) / (cfg.nx - 1), 2.0 / (cfg.ny - 1), 2.0 / (cfg.nz - 1));
    Vec3 p = Vec3(-1, -1, -1) +
             Vec3((x0 + fx) * cell_size[0], (y0 + fy) * cell_size[1], (z0 + fz) * cell_size[2]);
    FieldOutput out = field.eval(p, Vec3::UnitZ());
    CHECK(out.density == doctest::Approx(softplus(expected_raw)).epsilon(1e-10));
  };
  check_point(0.5, 0.0, 0.0, 0, 0, 0);
  check_point(0.25, 0.75, 0.5, 1, 1, 0);
  check_point(0.9, 0.1, 0.6, 2, 0, 1);
}

TEST_CASE("voxel queries outside the box are empty space") {
  VoxelGridField field(small_voxel());
  FieldOutput out = field.eval(Vec3(1.5, 0, 0), Vec3::UnitZ());
  CHECK(out.density == 0.0);
  CHECK(out.color.norm() == 0.0);

  // And they receive no gradient.
  std::vector<Vec3> pos{Vec3(1.5, 0, 0)}, dir{Vec3::UnitZ()};
  std::vector<FieldOutput> adj{FieldOutput{Vec3::Ones(), 1.0}};
  std::vector<double> grad(field.param_count(), 0.0);
  field.eval_backward(pos, dir, adj, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("voxel gradients match finite differences on 100+ coordinates") {
  VoxelGridField field(small_voxel());
  randomize(field, 21, 1.0);
  gradient_suite(field, 100, 22);
}

TEST_CASE("mlp outputs stay in range for arbitrary parameters") {
  MlpField field(small_mlp());
  randomize(field, 31, 3.0);
  for (int k = 0; k < 30; ++k) {
    Vec3 p(rng_uniform(33, k, 0) * 4 - 2, rng_uniform(33, k, 1) * 4 - 2,
           rng_uniform(33, k, 2) * 4 - 2);
    FieldOutput out = field.eval(p, Vec3::UnitX());
    CHECK(out.density >= 0.0);
    CHECK(out.color.minCoeff() >= 0.0);
    CHECK(out.color.maxCoeff() <= 1.0);
  }
}

TEST_CASE("mlp evaluation is deterministic") {
  MlpField a(small_mlp()), b(small_mlp());
  Vec3 p(0.2, -0.4, 0.6), d = Vec3(1, 2, 3).normalized();
  FieldOutput oa = a.eval(p, d), ob = b.eval(p, d);
  CHECK(oa.density == ob.density);
  CHECK(oa.color == ob.color);
}

TEST_CASE("mlp gradients match finite differences on 100+ coordinates") {
  MlpField field(small_mlp());
  randomize(field, 41, 0.3);
  gradient_suite(field, 100, 42);
}

TEST_CASE("backward is linear in the adjoints") {
  VoxelGridField field(small_voxel());
  randomize(field, 51, 1.0);
  std::vector<Vec3> pos{Vec3(0.1, 0.2, 0.3), Vec3(-0.4, 0.0, 0.5)};
  std::vector<Vec3> dir{Vec3::UnitZ(), Vec3::UnitZ()};

  std::vector<FieldOutput> zero(2);
  std::vector<double> grad(field.param_count(), 0.0);
  field.eval_backward(pos, dir, zero, grad);
  for (double g : grad) CHECK(g == 0.0);

  std::vector<FieldOutput> adj{{Vec3(0.5, -0.2, 0.1), 0.7}, {Vec3(0.0, 0.3, -0.4), -0.2}};
  std::vector<FieldOutput> twice{{Vec3(1.0, -0.4, 0.2), 1.4}, {Vec3(0.0, 0.6, -0.8), -0.4}};
  std::vector<double> g1(field.param_count(), 0.0), g2(field.param_count(), 0.0);
  field.eval_backward(pos, dir, adj, g1);
  field.eval_backward(pos, dir, twice, g2);
  for (size_t i = 0; i < g1.size(); ++i)
    CHECK(g2[i] == doctest::Approx(2.0 * g1[i]).epsilon(1e-12));
}

TEST_CASE("NaN parameters surface as a corrupted-state error") {
  VoxelGridField field(small_voxel());
  for (size_t i = 0; i < field.param_count(); ++i)
    field.params()[i] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(field.eval(Vec3(0, 0, 0), Vec3::UnitZ()), NumericError);
}
