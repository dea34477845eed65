// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/dataset.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace voldis {

ViewSpec PosedDataset::view_spec(int index) const {
  require(index >= 0 && index < static_cast<int>(views.size()),
          "dataset: view index out of range");
  ViewSpec v;
  v.intrinsics = views[index].intrinsics;
  v.pose = views[index].pose;
  v.t_near = t_near;
  v.t_far = t_far;
  return v;
}

void PosedDataset::validate() const {
  require(!views.empty(), "dataset: no views");
  require(t_near > 0.0 && t_near < t_far, "dataset: invalid t range");
  int w = views[0].image.width, h = views[0].image.height;
  for (size_t i = 0; i < views.size(); ++i) {
    const PosedView& v = views[i];
    require(v.image.width == w && v.image.height == h && v.image.channels == 3,
            "dataset: all views must share one RGB resolution");
    require(v.mask.width == w && v.mask.height == h && v.mask.channels == 1,
            "dataset: mask resolution must match the image");
    for (double m : v.mask.data)
      require(m == 0.0 || m == 1.0, "dataset: non-binary mask in view " + std::to_string(i));
    v.pose.validate();
    v.intrinsics.validate();
  }
}

namespace {

std::string view_name(size_t i) {
  std::ostringstream s;
  s << std::setw(4) << std::setfill('0') << i;
  return s.str();
}

}  // namespace

void save_dataset(const PosedDataset& dataset, const std::string& dir,
                  const std::vector<Image>* depth_maps) {
  dataset.validate();
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "masks");
  if (depth_maps) fs::create_directories(fs::path(dir) / "depth");

  json manifest;
  manifest["resolution"] = {dataset.width(), dataset.height()};
  manifest["t_near"] = dataset.t_near;
  manifest["t_far"] = dataset.t_far;
  manifest["views"] = json::array();

  for (size_t i = 0; i < dataset.views.size(); ++i) {
    const PosedView& v = dataset.views[i];
    std::string image_rel = "images/" + view_name(i) + ".png";
    std::string mask_rel = "masks/" + view_name(i) + ".png";
    write_png((fs::path(dir) / image_rel).string(), v.image);
    Image mask255 = v.mask;  // stored as 0/255 gray
    write_png((fs::path(dir) / mask_rel).string(), mask255);
    if (depth_maps)
      write_pfm((fs::path(dir) / ("depth/" + view_name(i) + ".pfm")).string(),
                (*depth_maps)[i]);

    json view;
    view["image"] = image_rel;
    view["mask"] = mask_rel;
    std::vector<double> pose(12);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose[r * 4 + c] = v.pose.rotation(r, c);
      pose[r * 4 + 3] = v.pose.translation[r];
    }
    view["pose"] = pose;
    view["focal"] = v.intrinsics.focal;
    view["principal"] = {v.intrinsics.cx, v.intrinsics.cy};
    manifest["views"].push_back(view);
  }

  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("save_dataset: cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

PosedDataset load_dataset(const std::string& dir) {
  fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw InputError("load_dataset: missing manifest: " + manifest_path.string());

  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw InputError("load_dataset: malformed manifest " + manifest_path.string() +
                     ": " + e.what());
  }

  PosedDataset ds;
  try {
    int w = manifest.at("resolution").at(0).get<int>();
    int h = manifest.at("resolution").at(1).get<int>();
    ds.t_near = manifest.at("t_near").get<double>();
    ds.t_far = manifest.at("t_far").get<double>();

    for (const json& view : manifest.at("views")) {
      PosedView v;
      fs::path image_path = fs::path(dir) / view.at("image").get<std::string>();
      fs::path mask_path = fs::path(dir) / view.at("mask").get<std::string>();
      if (!fs::exists(image_path))
        throw InputError("load_dataset: missing image file: " + image_path.string());
      if (!fs::exists(mask_path))
        throw InputError("load_dataset: missing mask file: " + mask_path.string());
      v.image = read_png(image_path.string());
      require(v.image.channels == 3, "load_dataset: image must be RGB: " + image_path.string());

      Image raw_mask = read_png(mask_path.string());
      require(raw_mask.channels == 1,
              "load_dataset: mask must be grayscale: " + mask_path.string());
      v.mask = raw_mask;
      for (double& m : v.mask.data) {
        if (m != 0.0 && m != 1.0)
          throw InputError("load_dataset: non-binary mask (values must be 0 or 255): " +
                           mask_path.string());
      }

      std::vector<double> pose = view.at("pose").get<std::vector<double>>();
      require(pose.size() == 12, "load_dataset: pose must have 12 entries");
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) v.pose.rotation(r, c) = pose[r * 4 + c];
        v.pose.translation[r] = pose[r * 4 + 3];
      }
      v.intrinsics.width = w;
      v.intrinsics.height = h;
      v.intrinsics.focal = view.at("focal").get<double>();
      v.intrinsics.cx = view.at("principal").at(0).get<double>();
      v.intrinsics.cy = view.at("principal").at(1).get<double>();
      ds.views.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw InputError("load_dataset: malformed manifest " + manifest_path.string() +
                     ": " + e.what());
  }

  ds.validate();
  return ds;
}

Image dilate_mask(const Image& mask, int radius) {
  if (radius <= 0) return mask;
  Image out = mask;
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c) != 1.0) continue;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc) {
          if (dr * dr + dc * dc > radius * radius) continue;
          int rr = r + dr, cc = c + dc;
          if (rr >= 0 && rr < mask.height && cc >= 0 && cc < mask.width)
            out.at(rr, cc) = 1.0;
        }
    }
  return out;
}

GeneratedDataset generate_dataset(const GenerateConfig& config) {
  config.scene.validate();
  require(config.arc.n_views >= 2, "generate_dataset: need at least two views");
  require(config.width >= 1 && config.height >= 1, "generate_dataset: empty resolution");

  double t_near, t_far;
  arc_t_range(config.scene, config.arc, &t_near, &t_far);

  GeneratedDataset gen;
  gen.dataset.t_near = t_near;
  gen.dataset.t_far = t_far;

  for (int i = 0; i < config.arc.n_views; ++i) {
    ViewSpec view = arc_view(config.scene, config.arc, i, config.width, config.height,
                             t_near, t_far);
    RenderResult full = oracle_render(config.scene, SceneSubset::All, view, config.oracle);
    RenderResult bg = oracle_render(config.scene, SceneSubset::Background, view, config.oracle);
    RenderResult fg = oracle_render(config.scene, SceneSubset::Foreground, view, config.oracle);

    PosedView pv;
    pv.image = full.color;
    for (double& v : pv.image.data) v = clamp01(v);
    pv.mask = Image(config.width, config.height, 1);
    for (int r = 0; r < config.height; ++r)
      for (int c = 0; c < config.width; ++c)
        pv.mask.at(r, c) = fg.opacity.at(r, c) > config.mask_threshold ? 1.0 : 0.0;
    pv.pose = view.pose;
    pv.intrinsics = view.intrinsics;
    gen.dataset.views.push_back(std::move(pv));

    gen.gt_full.push_back(std::move(full));
    gen.gt_background.push_back(std::move(bg));
    gen.gt_foreground.push_back(std::move(fg));
  }
  gen.dataset.validate();
  return gen;
}

void save_generated(const GeneratedDataset& gen, const std::string& dir) {
  std::vector<Image> depths;
  depths.reserve(gen.gt_full.size());
  for (const RenderResult& r : gen.gt_full) depths.push_back(r.depth);
  save_dataset(gen.dataset, dir, &depths);
  for (size_t i = 0; i < gen.gt_full.size(); ++i) {
    std::string name = view_name(i);
    fs::create_directories(fs::path(dir) / "gt_full");
    fs::create_directories(fs::path(dir) / "gt_background");
    fs::create_directories(fs::path(dir) / "gt_foreground");
    write_png((fs::path(dir) / "gt_full" / (name + ".png")).string(),
              export_color(gen.gt_full[i].color));
    write_png((fs::path(dir) / "gt_background" / (name + ".png")).string(),
              export_color(gen.gt_background[i].color));
    write_png((fs::path(dir) / "gt_foreground" / (name + ".png")).string(),
              export_color(gen.gt_foreground[i].color));
  }
}

}  // namespace voldis
