#include "planar/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace planar {

namespace {
constexpr double kRayEpsilon = 1e-12;
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k = Mat3::Identity();
  k(0, 0) = fx;
  k(1, 1) = fy;
  k(0, 2) = cx;
  k(1, 2) = cy;
  return k;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
  Mat3 k = Mat3::Identity();
  k(0, 0) = 1.0 / fx;
  k(1, 1) = 1.0 / fy;
  k(0, 2) = -cx / fx;
  k(1, 2) = -cy / fy;
  return k;
}

Vec3 CameraIntrinsics::ray(double u, double v) const {
  return Vec3((u - cx) / fx, (v - cy) / fy, 1.0);
}

CameraIntrinsics CameraIntrinsics::scaled(int factor) const {
  if (factor < 1 || width % factor != 0 || height % factor != 0) {
    throw std::invalid_argument(
        "image dimensions not divisible by working scale");
  }
  // Coarse pixel (X, Y) covers full-resolution pixels [sX, sX+s); its center
  // sits at full-resolution coordinate sX + (s-1)/2.
  CameraIntrinsics k;
  const double s = static_cast<double>(factor);
  k.fx = fx / s;
  k.fy = fy / s;
  k.cx = (cx - (s - 1.0) * 0.5) / s;
  k.cy = (cy - (s - 1.0) * 0.5) / s;
  k.width = width / factor;
  k.height = height / factor;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("invalid intrinsics: focal lengths");
  }
  if (width <= 0 || height <= 0 || !(cx >= 0.0 && cx < width) ||
      !(cy >= 0.0 && cy < height)) {
    throw std::invalid_argument("invalid intrinsics: principal point");
  }
}

void RelativePose::validate() const {
  const Mat3 rtr = rotation.transpose() * rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(rotation.determinant() - 1.0) > 1e-9 ||
      !translation.allFinite()) {
    throw std::invalid_argument("invalid pose");
  }
}

RelativePose RelativePose::inverse() const {
  RelativePose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation.transpose() * translation);
  return inv;
}

RelativePose RelativePose::compose(const RelativePose& first,
                                   const RelativePose& second) {
  RelativePose out;
  out.rotation = second.rotation * first.rotation;
  out.translation = second.rotation * first.translation + second.translation;
  return out;
}

PlaneParam PlaneParam::from_normal_offset(const Vec3& normal, double offset) {
  if (offset == 0.0) {
    throw std::invalid_argument("invalid plane");
  }
  return PlaneParam(normal / offset);
}

PlaneParam PlaneParam::fronto(double depth) {
  if (!(depth > 0.0)) {
    throw std::invalid_argument("invalid plane");
  }
  return PlaneParam(0.0, 0.0, -1.0 / depth);
}

void PlaneParam::to_normal_offset(Vec3* normal, double* offset) const {
  validate();
  const double n = p.norm();
  // (p / |p|, 1 / |p|) satisfies n^T x + e = 0; flip so e < 0.
  *normal = -p / n;
  *offset = -1.0 / n;
}

bool PlaneParam::is_valid() const { return p.allFinite() && p.norm() > 0.0; }

void PlaneParam::validate() const {
  if (!is_valid()) {
    throw std::invalid_argument("invalid plane");
  }
}

Homography Homography::from_matrix(const Mat3& m) {
  Homography out;
  out.h = m;
  if (std::abs(m(2, 2)) > 1e-12) {
    out.h /= m(2, 2);
  }
  return out;
}

bool Homography::apply(double u, double v, double* out_u, double* out_v) const {
  const double w = h(2, 0) * u + h(2, 1) * v + h(2, 2);
  if (std::abs(w) < 1e-15) {
    return false;
  }
  *out_u = (h(0, 0) * u + h(0, 1) * v + h(0, 2)) / w;
  *out_v = (h(1, 0) * u + h(1, 1) * v + h(1, 2)) / w;
  return true;
}

Homography induce_homography(const PlaneParam& plane, const RelativePose& pose,
                             const CameraIntrinsics& k_tgt,
                             const CameraIntrinsics& k_src) {
  plane.validate();
  pose.validate();
  const Mat3 m = pose.rotation - pose.translation * plane.p.transpose();
  return Homography::from_matrix(k_src.matrix() * m *
                                 k_tgt.inverse_matrix());
}

DepthMap plane_to_depth(const PlaneParam& plane, const CameraIntrinsics& k,
                        const PixelGrid& grid) {
  plane.validate();
  DepthMap out(grid.height, grid.width);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const double s = plane.p.dot(k.ray(x, y));
      if (s < -kRayEpsilon) {
        out.values.at(y, x) = -1.0 / s;
        out.valid.at(y, x) = 1;
      }
    }
  }
  return out;
}

Vec3 depth_to_point(const CameraIntrinsics& k, double u, double v,
                    double depth) {
  if (!(depth > 0.0)) {
    throw std::invalid_argument("non-positive depth");
  }
  return depth * k.ray(u, v);
}

DepthMap param_map_to_depth(const PlaneParamMap& params,
                            const CameraIntrinsics& k) {
  DepthMap out(params.height, params.width);
  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      if (!params.valid.at(y, x)) continue;
      const double s = params.at(y, x).dot(k.ray(x, y));
      if (s < -kRayEpsilon) {
        out.values.at(y, x) = -1.0 / s;
        out.valid.at(y, x) = 1;
      }
    }
  }
  return out;
}

ImageRaster ImageRaster::to_gray() const {
  if (channels == 1) {
    return *this;
  }
  ImageRaster gray(height, width, 1);
  gray.valid = valid;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      gray.at(y, x) =
          0.299 * at(y, x, 0) + 0.587 * at(y, x, 1) + 0.114 * at(y, x, 2);
    }
  }
  return gray;
}

}  // namespace planar
