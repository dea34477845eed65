// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/geometry.hpp"

#include <sstream>

namespace voldis {

void CameraIntrinsics::validate() const {
  require(width >= 1 && height >= 1, "intrinsics: width and height must be >= 1");
  require(focal > 0.0, "intrinsics: focal must be > 0");
}

CameraIntrinsics CameraIntrinsics::centered(int width, int height, double focal) {
  CameraIntrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.focal = focal;
  intr.cx = 0.5 * (width - 1);
  intr.cy = 0.5 * (height - 1);
  intr.validate();
  return intr;
}

void Pose::validate() const {
  Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  require(err.cwiseAbs().maxCoeff() <= 1e-6, "pose: rotation is not orthonormal");
  require(rotation.determinant() > 0.0, "pose: rotation must have determinant +1");
}

Ray ray_through(const CameraIntrinsics& intr, const Pose& pose,
                double row, double col, double t_near, double t_far) {
  Vec3 d_cam((col - intr.cx) / intr.focal, -(row - intr.cy) / intr.focal, -1.0);
  Ray ray;
  ray.origin = pose.translation;
  ray.direction = (pose.rotation * d_cam).normalized();
  ray.t_near = t_near;
  ray.t_far = t_far;
  return ray;
}

std::vector<Ray> generate_rays(const CameraIntrinsics& intr, const Pose& pose,
                               const std::vector<PixelCoord>& pixels,
                               double t_near, double t_far) {
  intr.validate();
  require(t_near > 0.0 && t_near < t_far, "generate_rays: need 0 < t_near < t_far");
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  for (const PixelCoord& px : pixels) {
    if (px.row < 0 || px.row >= intr.height || px.col < 0 || px.col >= intr.width) {
      std::ostringstream msg;
      msg << "generate_rays: pixel (" << px.row << ", " << px.col
          << ") outside " << intr.width << "x" << intr.height << " image";
      throw InputError(msg.str());
    }
    rays.push_back(ray_through(intr, pose, px.row, px.col, t_near, t_far));
  }
  return rays;
}

void SimilarityTransform::validate() const {
  require(scale > 0.0, "similarity: scale must be > 0");
  Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  require(err.cwiseAbs().maxCoeff() <= 1e-6, "similarity: rotation is not orthonormal");
}

Vec3 SimilarityTransform::apply(const Vec3& p) const {
  return scale * (rotation * p) + translation;
}

bool SimilarityTransform::is_identity(double tol) const {
  return std::abs(scale - 1.0) <= tol &&
         (rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         translation.cwiseAbs().maxCoeff() <= tol;
}

SimilarityTransform SimilarityTransform::identity() { return {}; }

SimilarityTransform SimilarityTransform::translate(const Vec3& t) {
  SimilarityTransform T;
  T.translation = t;
  return T;
}

SimilarityTransform SimilarityTransform::rotate(const Vec3& axis, double degrees) {
  require(axis.norm() > 0.0, "similarity: rotation axis must be non-zero");
  SimilarityTransform T;
  T.rotation = Eigen::AngleAxisd(degrees * M_PI / 180.0, axis.normalized()).toRotationMatrix();
  return T;
}

SimilarityTransform SimilarityTransform::scaled(double s) {
  require(s > 0.0, "similarity: scale must be > 0");
  SimilarityTransform T;
  T.scale = s;
  return T;
}

SimilarityTransform invert_similarity(const SimilarityTransform& T) {
  T.validate();
  SimilarityTransform inv;
  inv.scale = 1.0 / T.scale;
  inv.rotation = T.rotation.transpose();
  inv.translation = -(inv.rotation * T.translation) / T.scale;
  return inv;
}

SimilarityTransform compose_similarity(const SimilarityTransform& a,
                                       const SimilarityTransform& b) {
  SimilarityTransform c;
  c.scale = a.scale * b.scale;
  c.rotation = a.rotation * b.rotation;
  c.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return c;
}

}  // namespace voldis
