// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/field_io.hpp"

#include "voldis/mlp_field.hpp"
#include "voldis/voxel_field.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace voldis {

namespace {

constexpr char kMagic[4] = {'V', 'D', 'S', 'F'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kTagMlp = 1;
constexpr uint32_t kTagVoxel = 2;
constexpr uint32_t kTagAdam = 3;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("checkpoint: cannot open " + path + " for writing");
  }
  template <typename T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_bytes(const void* p, size_t n) {
    out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void finish() {
    if (!out_) throw IoError("checkpoint: failed writing " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("checkpoint: cannot open " + path);
  }
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  void get_bytes(void* p, size_t n) {
    in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    check();
  }
  void check() {
    if (!in_) throw IoError("checkpoint: truncated or unreadable file " + path_);
  }
  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
};

struct MlpMeta {
  uint32_t hidden_layers, width, color_width, pos_features, dir_features, view_dependent;
  double pos_sigma, dir_sigma, init_density;
  uint64_t seed;
};

struct VoxelMeta {
  uint32_t nx, ny, nz, pad;
  double bbox[6];
  double init_density, init_color;
};

struct AdamMeta {
  uint64_t step;
};

void write_params_f32(Writer& w, std::span<const double> params) {
  uint64_t n = params.size();
  w.put(n);
  std::vector<float> buf(params.size());
  for (size_t i = 0; i < params.size(); ++i) buf[i] = static_cast<float>(params[i]);
  w.put_bytes(buf.data(), buf.size() * sizeof(float));
}

void read_params_f32(Reader& r, std::span<double> params) {
  uint64_t n = r.get<uint64_t>();
  if (n != params.size())
    throw IoError("checkpoint: parameter count mismatch in " + r.path());
  std::vector<float> buf(params.size());
  r.get_bytes(buf.data(), buf.size() * sizeof(float));
  for (size_t i = 0; i < params.size(); ++i) params[i] = buf[i];
}

uint32_t read_header(Reader& r) {
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("checkpoint: bad magic in " + r.path());
  uint32_t version = r.get<uint32_t>();
  if (version != kVersion)
    throw IoError("checkpoint: unsupported version in " + r.path());
  return r.get<uint32_t>();  // tag
}

}  // namespace

void save_field(const RadianceField& field, const std::string& path) {
  Writer w(path);
  w.put_bytes(kMagic, 4);
  w.put(kVersion);
  if (field.kind() == "mlp") {
    const auto& mlp = static_cast<const MlpField&>(field);
    const MlpConfig& c = mlp.config();
    w.put(kTagMlp);
    MlpMeta meta{static_cast<uint32_t>(c.hidden_layers), static_cast<uint32_t>(c.width),
                 static_cast<uint32_t>(c.color_width), static_cast<uint32_t>(c.pos_features),
                 static_cast<uint32_t>(c.dir_features), c.view_dependent ? 1u : 0u,
                 c.pos_sigma, c.dir_sigma, c.init_density, c.seed};
    w.put(static_cast<uint32_t>(sizeof(meta)));
    w.put(meta);
  } else if (field.kind() == "voxel") {
    const auto& vox = static_cast<const VoxelGridField&>(field);
    const VoxelGridConfig& c = vox.config();
    w.put(kTagVoxel);
    VoxelMeta meta{static_cast<uint32_t>(c.nx), static_cast<uint32_t>(c.ny),
                   static_cast<uint32_t>(c.nz), 0,
                   {c.bbox_min[0], c.bbox_min[1], c.bbox_min[2],
                    c.bbox_max[0], c.bbox_max[1], c.bbox_max[2]},
                   c.init_density, c.init_color};
    w.put(static_cast<uint32_t>(sizeof(meta)));
    w.put(meta);
  } else {
    throw InputError("checkpoint: field kind '" + std::string(field.kind()) +
                     "' is not serializable");
  }
  write_params_f32(w, field.params());
  w.finish();
}

std::unique_ptr<RadianceField> load_field(const std::string& path) {
  Reader r(path);
  uint32_t tag = read_header(r);
  uint32_t meta_len = r.get<uint32_t>();
  if (tag == kTagMlp) {
    if (meta_len != sizeof(MlpMeta)) throw IoError("checkpoint: bad mlp metadata in " + path);
    MlpMeta meta = r.get<MlpMeta>();
    MlpConfig c;
    c.hidden_layers = static_cast<int>(meta.hidden_layers);
    c.width = static_cast<int>(meta.width);
    c.color_width = static_cast<int>(meta.color_width);
    c.pos_features = static_cast<int>(meta.pos_features);
    c.dir_features = static_cast<int>(meta.dir_features);
    c.view_dependent = meta.view_dependent != 0;
    c.pos_sigma = meta.pos_sigma;
    c.dir_sigma = meta.dir_sigma;
    c.init_density = meta.init_density;
    c.seed = meta.seed;
    auto field = std::make_unique<MlpField>(c);
    read_params_f32(r, field->params());
    return field;
  }
  if (tag == kTagVoxel) {
    if (meta_len != sizeof(VoxelMeta)) throw IoError("checkpoint: bad voxel metadata in " + path);
    VoxelMeta meta = r.get<VoxelMeta>();
    VoxelGridConfig c;
    c.nx = static_cast<int>(meta.nx);
    c.ny = static_cast<int>(meta.ny);
    c.nz = static_cast<int>(meta.nz);
    c.bbox_min = Vec3(meta.bbox[0], meta.bbox[1], meta.bbox[2]);
    c.bbox_max = Vec3(meta.bbox[3], meta.bbox[4], meta.bbox[5]);
    c.init_density = meta.init_density;
    c.init_color = meta.init_color;
    auto field = std::make_unique<VoxelGridField>(c);
    read_params_f32(r, field->params());
    return field;
  }
  throw IoError("checkpoint: not a field container: " + path);
}

void save_adam_state(const AdamState& state, const std::string& path) {
  Writer w(path);
  w.put_bytes(kMagic, 4);
  w.put(kVersion);
  w.put(kTagAdam);
  AdamMeta meta{static_cast<uint64_t>(state.step)};
  w.put(static_cast<uint32_t>(sizeof(meta)));
  w.put(meta);
  std::vector<double> mv;
  mv.reserve(state.m.size() + state.v.size());
  mv.insert(mv.end(), state.m.begin(), state.m.end());
  mv.insert(mv.end(), state.v.begin(), state.v.end());
  write_params_f32(w, mv);
  w.finish();
}

AdamState load_adam_state(const std::string& path) {
  Reader r(path);
  uint32_t tag = read_header(r);
  if (tag != kTagAdam) throw IoError("checkpoint: not an adam sidecar: " + path);
  uint32_t meta_len = r.get<uint32_t>();
  if (meta_len != sizeof(AdamMeta)) throw IoError("checkpoint: bad adam metadata in " + path);
  AdamMeta meta = r.get<AdamMeta>();
  uint64_t n2 = r.get<uint64_t>();
  if (n2 % 2 != 0) throw IoError("checkpoint: corrupt adam payload in " + path);
  std::vector<float> buf(n2);
  r.get_bytes(buf.data(), buf.size() * sizeof(float));
  AdamState state(n2 / 2);
  state.step = static_cast<int64_t>(meta.step);
  for (size_t i = 0; i < state.m.size(); ++i) {
    state.m[i] = buf[i];
    state.v[i] = buf[state.m.size() + i];
  }
  return state;
}

}  // namespace voldis
