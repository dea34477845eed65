// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/dataset.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace voldis;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "voldis_dataset_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

GeneratedDataset tiny_dataset(int views = 3, int res = 16) {
  GenerateConfig cfg;
  cfg.scene = make_scene_preset("default");
  cfg.arc.n_views = views;
  cfg.width = res;
  cfg.height = res;
  cfg.oracle.march_steps = 96;
  cfg.oracle.supersample = 1;
  return generate_dataset(cfg);
}

}  // namespace

TEST_CASE("dataset round trip reproduces images and poses") {
  fs::path dir = fresh_dir("roundtrip");
  GeneratedDataset gen = tiny_dataset();
  save_dataset(gen.dataset, dir.string());
  PosedDataset loaded = load_dataset(dir.string());

  REQUIRE(loaded.views.size() == gen.dataset.views.size());
  CHECK(loaded.t_near == doctest::Approx(gen.dataset.t_near).epsilon(1e-12));

  // Pixels pass through one 8-bit quantization; a second save/load cycle is
  // the fixed point and must reproduce files bit-exactly.
  fs::path dir2 = fresh_dir("roundtrip2");
  save_dataset(loaded, dir2.string());
  PosedDataset loaded2 = load_dataset(dir2.string());
  for (size_t v = 0; v < loaded.views.size(); ++v) {
    CHECK(loaded.views[v].image.data == loaded2.views[v].image.data);
    CHECK(loaded.views[v].mask.data == loaded2.views[v].mask.data);
    CHECK((loaded.views[v].pose.rotation - gen.dataset.views[v].pose.rotation)
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
    CHECK((loaded.views[v].pose.translation - gen.dataset.views[v].pose.translation)
              .norm() <= 1e-9);
    CHECK(loaded.views[v].intrinsics.focal ==
          doctest::Approx(gen.dataset.views[v].intrinsics.focal).epsilon(1e-12));
  }
}

TEST_CASE("missing mask file is reported with its path") {
  fs::path dir = fresh_dir("missing_mask");
  GeneratedDataset gen = tiny_dataset();
  save_dataset(gen.dataset, dir.string());
  fs::remove(dir / "masks" / "0001.png");
  try {
    load_dataset(dir.string());
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("0001.png") != std::string::npos);
  }
}

TEST_CASE("malformed manifest and non-binary mask are input errors") {
  fs::path dir = fresh_dir("malformed");
  std::ofstream(dir / "manifest.json") << "{ not json";
  CHECK_THROWS_AS(load_dataset(dir.string()), InputError);

  fs::path dir2 = fresh_dir("nonbinary");
  GeneratedDataset gen = tiny_dataset();
  save_dataset(gen.dataset, dir2.string());
  Image gray(gen.dataset.width(), gen.dataset.height(), 1, 0.5);
  write_png((dir2 / "masks" / "0000.png").string(), gray);
  CHECK_THROWS_AS(load_dataset(dir2.string()), InputError);
}

TEST_CASE("missing manifest names the file") {
  fs::path dir = fresh_dir("empty");
  try {
    load_dataset(dir.string());
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("manifest.json") != std::string::npos);
  }
}

TEST_CASE("a 504x378 dataset loads and reports its resolution") {
  fs::path dir = fresh_dir("paperres");
  GenerateConfig cfg;
  cfg.scene = make_scene_preset("default");
  cfg.arc.n_views = 2;
  cfg.width = 504;
  cfg.height = 378;
  cfg.oracle.march_steps = 24;
  cfg.oracle.supersample = 1;
  GeneratedDataset gen = generate_dataset(cfg);
  save_dataset(gen.dataset, dir.string());
  PosedDataset loaded = load_dataset(dir.string());
  CHECK(loaded.width() == 504);
  CHECK(loaded.height() == 378);
}

TEST_CASE("identical poses produce identical images") {
  GenerateConfig cfg;
  cfg.scene = make_scene_preset("default");
  cfg.arc.n_views = 2;
  cfg.arc.arc_degrees = 0.0;
  cfg.arc.elevation_degrees = 0.0;
  cfg.width = 12;
  cfg.height = 12;
  cfg.oracle.march_steps = 64;
  GeneratedDataset gen = generate_dataset(cfg);
  CHECK(gen.dataset.views[0].image.data == gen.dataset.views[1].image.data);
  CHECK(gen.dataset.views[0].mask.data == gen.dataset.views[1].mask.data);
}

TEST_CASE("masks trace the projected foreground disc") {
  GeneratedDataset gen = tiny_dataset(3, 64);
  const PosedView& v = gen.dataset.views[1];

  double mask_area = 0.0;
  for (double m : v.mask.data) mask_area += m;
  CHECK(mask_area > 0.0);

  // Analytic disc: radius * focal / depth pixels around the projection.
  const AnalyticScene scene = make_scene_preset("default");
  const Primitive& sphere = scene.primitives[1];
  double depth = (v.pose.translation - sphere.center).norm();
  double radius_px = sphere.radius * v.intrinsics.focal / depth;
  double disc_area = M_PI * radius_px * radius_px;
  CHECK(mask_area == doctest::Approx(disc_area).epsilon(0.10));

  // Mask equals thresholded foreground opacity by construction.
  for (int r = 0; r < v.mask.height; ++r)
    for (int c = 0; c < v.mask.width; ++c) {
      bool inside = gen.gt_foreground[1].opacity.at(r, c) > 0.5;
      CHECK(v.mask.at(r, c) == (inside ? 1.0 : 0.0));
    }
}

TEST_CASE("mask dilation grows by the disc radius") {
  Image mask(9, 9, 1, 0.0);
  mask.at(4, 4) = 1.0;
  Image grown = dilate_mask(mask, 2);
  CHECK(grown.at(4, 6) == 1.0);
  CHECK(grown.at(6, 4) == 1.0);
  CHECK(grown.at(4, 7) == 0.0);
  CHECK(grown.at(6, 6) == 0.0);  // corner at radius sqrt(8) > 2
  double area = 0.0;
  for (double m : grown.data) area += m;
  CHECK(area == 13.0);
}
