// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/common.hpp"

#include <utility>
#include <vector>

namespace voldis {

struct CameraIntrinsics {
  int width = 0;
  int height = 0;
  double focal = 0.0;           // pixels
  double cx = 0.0, cy = 0.0;    // principal point, pixels

  void validate() const;

  // Principal point at the center of the pixel grid.
  static CameraIntrinsics centered(int width, int height, double focal);
};

// Camera-to-world transform. The camera looks down -z in camera space,
// image rows increase downward.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  // Rejects rotations that are not orthonormal with det +1 (inf-norm 1e-6).
  void validate() const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit norm
  double t_near = 0.0;
  double t_far = 0.0;

  Vec3 at(double t) const { return origin + t * direction; }
};

struct PixelCoord {
  int row = 0;
  int col = 0;
};

// Ray through an arbitrary (possibly fractional) pixel position. No bounds
// check; used by supersampling and resampling paths.
Ray ray_through(const CameraIntrinsics& intr, const Pose& pose,
                double row, double col, double t_near, double t_far);

// One ray per pixel, in input order. Pixels out of bounds are an input error.
std::vector<Ray> generate_rays(const CameraIntrinsics& intr, const Pose& pose,
                               const std::vector<PixelCoord>& pixels,
                               double t_near, double t_far);

// p -> scale * R * p + t
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const;
  Vec3 apply(const Vec3& p) const;
  bool is_identity(double tol = 0.0) const;

  static SimilarityTransform identity();
  static SimilarityTransform translate(const Vec3& t);
  // Rodrigues rotation about a (non-zero) axis, angle in degrees.
  static SimilarityTransform rotate(const Vec3& axis, double degrees);
  static SimilarityTransform scaled(double s);
};

SimilarityTransform invert_similarity(const SimilarityTransform& T);
// compose(a, b) maps p -> a(b(p)).
SimilarityTransform compose_similarity(const SimilarityTransform& a,
                                       const SimilarityTransform& b);

}  // namespace voldis
