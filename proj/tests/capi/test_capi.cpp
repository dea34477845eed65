// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared-library surface only: this binary links libvoldis and
// includes nothing from the C++ core.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <voldis/voldis.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string work_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "voldis_capi_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

const char* kTinyConfig = R"({
  "generate": {"views": 3, "resolution": [12, 12], "march_steps": 64, "supersample": 1},
  "field": {"resolution": [8, 8, 8]},
  "train": {"iterations": 30, "rays_per_batch": 64, "n_coarse": 8, "n_fine": 8,
            "lr_start": 0.05, "lr_end": 0.01, "checkpoint_every": 10},
  "composite": {"samples": 32},
  "manip": {"iterations": 10, "rays_per_batch": 64, "n_samples": 32,
            "lr_start": 0.05, "lr_end": 0.01, "checkpoint_every": 5},
  "semantic": {"resolution": [12, 12], "clip_grid": 8, "clip_input": 12, "view_block": 2}
})";

}  // namespace

TEST_CASE("version and error strings are always valid") {
  CHECK(vd_version() != nullptr);
  CHECK(vd_last_error() != nullptr);
}

TEST_CASE("opening a missing dataset fails with a message") {
  vd_dataset* ds = nullptr;
  vd_status s = vd_dataset_open("/nonexistent/dataset", &ds);
  CHECK(s == VD_ERR_INPUT);
  CHECK(std::strlen(vd_last_error()) > 0);
}

TEST_CASE("malformed and unknown-key configs are rejected") {
  std::string out = work_dir("badcfg");
  CHECK(vd_generate("{ not json", out.c_str()) == VD_ERR_INPUT);
  CHECK(vd_generate(R"({"generat": {}})", out.c_str()) == VD_ERR_INPUT);
  CHECK(std::string(vd_last_error()).find("generat") != std::string::npos);
}

TEST_CASE("full pipeline through the C surface") {
  std::string data_dir = work_dir("pipeline_data");
  REQUIRE(vd_generate(kTinyConfig, data_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(data_dir) / "manifest.json"));
  CHECK(fs::exists(fs::path(data_dir) / "gt_background" / "0000.png"));
  CHECK(fs::exists(fs::path(data_dir) / "config.json"));

  vd_dataset* ds = nullptr;
  REQUIRE(vd_dataset_open(data_dir.c_str(), &ds) == VD_OK);
  CHECK(vd_dataset_view_count(ds) == 3);
  int w = 0, h = 0;
  vd_dataset_resolution(ds, &w, &h);
  CHECK(w == 12);
  CHECK(h == 12);

  // Fit the full field.
  vd_fields* fields = nullptr;
  REQUIRE(vd_fields_create(kTinyConfig, &fields) == VD_OK);
  std::string run_dir = work_dir("pipeline_run");
  REQUIRE(vd_fit(fields, ds, kTinyConfig, run_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(run_dir) / "metrics.csv"));
  CHECK(fs::exists(fs::path(run_dir) / "config.json"));
  CHECK(fs::exists(fs::path(run_dir) / "checkpoints" / "coarse.vdsf"));
  CHECK(fs::exists(fs::path(run_dir) / "checkpoints" / "fine.vdsf"));

  // Reopen from the checkpoint and render a view.
  vd_fields* reopened = nullptr;
  std::string ckpt = (fs::path(run_dir) / "checkpoints").string();
  REQUIRE(vd_fields_open(ckpt.c_str(), &reopened) == VD_OK);
  std::string render_dir = work_dir("pipeline_render");
  double psnr_value = 0.0;
  REQUIRE(vd_render_view(reopened, ds, 0, kTinyConfig, render_dir.c_str(),
                         &psnr_value) == VD_OK);
  CHECK(fs::exists(fs::path(render_dir) / "view_0000.png"));
  CHECK(fs::exists(fs::path(render_dir) / "view_0000_depth.pfm"));
  CHECK(psnr_value > 5.0);

  // Checkpoint fidelity: re-rendering the held-out view from the saved
  // checkpoint reproduces the fit-time PSNR to within 0.1 dB.
  {
    std::ifstream csv(fs::path(run_dir) / "metrics.csv");
    std::string line, last;
    std::getline(csv, line);  // header
    while (std::getline(csv, line))
      if (!line.empty()) last = line;
    REQUIRE(!last.empty());
    double fit_psnr = std::strtod(last.substr(last.rfind(',') + 1).c_str(), nullptr);
    int holdout = vd_dataset_view_count(ds) - 1;
    double render_psnr = 0.0;
    REQUIRE(vd_render_view(reopened, ds, holdout, kTinyConfig, render_dir.c_str(),
                           &render_psnr) == VD_OK);
    CHECK(render_psnr >= fit_psnr - 0.1);
  }

  // Out-of-range view index is an input error.
  CHECK(vd_render_view(reopened, ds, 99, kTinyConfig, render_dir.c_str(), nullptr) ==
        VD_ERR_INPUT);

  // Extraction against a second (trivially different) field pair.
  vd_fields* bg = nullptr;
  REQUIRE(vd_fields_create(kTinyConfig, &bg) == VD_OK);
  std::string extract_dir = work_dir("pipeline_extract");
  REQUIRE(vd_extract(fields, bg, ds, kTinyConfig, 0, extract_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(extract_dir) / "foreground" / "view_0000.png"));
  CHECK(fs::exists(fs::path(extract_dir) / "composite" / "view_0000_disparity.pfm"));

  // Removal and transform.
  std::string remove_dir = work_dir("pipeline_remove");
  REQUIRE(vd_remove(bg, ds, kTinyConfig, 0, remove_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(remove_dir) / "view_0000.png"));
  std::string transform_dir = work_dir("pipeline_transform");
  REQUIRE(vd_transform(fields, bg, ds, kTinyConfig, 0, transform_dir.c_str()) == VD_OK);

  // Fitted manipulations.
  std::string camo_dir = work_dir("pipeline_camo");
  REQUIRE(vd_camouflage(fields, bg, ds, kTinyConfig, camo_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(camo_dir) / "checkpoints" / "override.vdsf"));
  CHECK(fs::exists(fs::path(camo_dir) / "renders" / "view_0000.png"));

  std::string nn_dir = work_dir("pipeline_nonneg");
  REQUIRE(vd_nonneg(fields, bg, ds, kTinyConfig, nn_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(nn_dir) / "checkpoints" / "residual.vdsf"));

  std::string sem_dir = work_dir("pipeline_semantic");
  REQUIRE(vd_semantic(fields, bg, ds, "red", kTinyConfig, sem_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(sem_dir) / "checkpoints" / "override.vdsf"));
  CHECK(vd_semantic(fields, bg, ds, "", kTinyConfig, sem_dir.c_str()) == VD_ERR_INPUT);

  // Reports from the fit run.
  REQUIRE(vd_report(run_dir.c_str()) == VD_OK);
  CHECK(fs::exists(fs::path(run_dir) / "report" / "summary.txt"));
  CHECK(vd_report(work_dir("no_metrics").c_str()) == VD_ERR_INPUT);

  vd_fields_close(bg);
  vd_fields_close(reopened);
  vd_fields_close(fields);
  vd_dataset_close(ds);
}

TEST_CASE("corrupted parameters abort the run with the numeric status") {
  std::string data_dir = work_dir("nan_data");
  REQUIRE(vd_generate(kTinyConfig, data_dir.c_str()) == VD_OK);
  vd_dataset* ds = nullptr;
  REQUIRE(vd_dataset_open(data_dir.c_str(), &ds) == VD_OK);

  vd_fields* fields = nullptr;
  REQUIRE(vd_fields_create(kTinyConfig, &fields) == VD_OK);
  std::string ckpt = work_dir("nan_ckpt");
  REQUIRE(vd_fields_save(fields, ckpt.c_str()) == VD_OK);
  vd_fields_close(fields);

  // Poison the stored parameter payload with NaNs and reopen. The payload is
  // the trailing f32 array; the header and count stay intact.
  fs::path coarse = fs::path(ckpt) / "coarse.vdsf";
  {
    std::fstream f(coarse, std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(f.good());
    f.seekg(0, std::ios::end);
    auto size = static_cast<long>(f.tellg());
    const uint32_t nan_bits = 0x7fc00000u;
    const long payload = 512 * 4 * 4;  // 8^3 vertices x 4 raw channels x f32
    REQUIRE(size > payload);
    for (long off = size - payload; off + 4 <= size; off += 4) {
      f.seekp(off);
      f.write(reinterpret_cast<const char*>(&nan_bits), 4);
    }
  }
  vd_fields* poisoned = nullptr;
  REQUIRE(vd_fields_open(ckpt.c_str(), &poisoned) == VD_OK);
  std::string run_dir = work_dir("nan_run");
  CHECK(vd_fit(poisoned, ds, kTinyConfig, run_dir.c_str()) == VD_ERR_NUMERIC);
  CHECK(std::strlen(vd_last_error()) > 0);

  vd_fields_close(poisoned);
  vd_dataset_close(ds);
}

TEST_CASE("checkpoint save/open round trip preserves the fields") {
  vd_fields* fields = nullptr;
  REQUIRE(vd_fields_create(kTinyConfig, &fields) == VD_OK);
  std::string dir = work_dir("ckpt_roundtrip");
  REQUIRE(vd_fields_save(fields, dir.c_str()) == VD_OK);
  vd_fields* loaded = nullptr;
  REQUIRE(vd_fields_open(dir.c_str(), &loaded) == VD_OK);
  std::string dir2 = work_dir("ckpt_roundtrip2");
  REQUIRE(vd_fields_save(loaded, dir2.c_str()) == VD_OK);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  CHECK(slurp(fs::path(dir) / "coarse.vdsf") == slurp(fs::path(dir2) / "coarse.vdsf"));
  vd_fields_close(loaded);
  vd_fields_close(fields);
}
