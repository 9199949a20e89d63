#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "planar/raster.hpp"

namespace planar {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Pinhole camera without distortion. Integer pixel coordinates address
// pixel centers; the image spans [-0.5, width - 0.5) x [-0.5, height - 0.5).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  Mat3 matrix() const;
  Mat3 inverse_matrix() const;

  // K^-1 (u, v, 1): viewing ray with unit z component.
  Vec3 ray(double u, double v) const;

  // Intrinsics of the image box-downsampled by `factor` (same pixel-center
  // convention). Requires width and height divisible by factor.
  CameraIntrinsics scaled(int factor) const;

  void validate() const;
};

// Rigid transform taking target-camera coordinates to source-camera
// coordinates: X_src = R * X_tgt + t.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const;
  RelativePose inverse() const;

  // this-after-other: X_c = compose(a->b, b->c) maps a to c.
  static RelativePose compose(const RelativePose& first,
                              const RelativePose& second);
};

// Plane n^T x + e = 0 in the target camera frame, stored as p = n / e.
// Points X on the plane satisfy p^T X = -1; p is invariant to the sign
// flip (n, e) -> (-n, -e). We keep e < 0 for planes in front of the camera
// when a signed (n, e) pair is needed.
struct PlaneParam {
  Vec3 p = Vec3::Zero();

  PlaneParam() = default;
  explicit PlaneParam(const Vec3& v) : p(v) {}
  PlaneParam(double x, double y, double z) : p(x, y, z) {}

  static PlaneParam from_normal_offset(const Vec3& normal, double offset);

  // Fronto-parallel plane at the given positive depth: (0, 0, -1/depth).
  static PlaneParam fronto(double depth);

  // Signed representation with e < 0 and a unit normal.
  void to_normal_offset(Vec3* normal, double* offset) const;

  bool is_valid() const;
  void validate() const;
};

// 3x3 homography mapping target pixel coordinates to source pixel
// coordinates, defined up to scale. Stored normalized so H(2,2) = 1
// whenever |H(2,2)| > 1e-12.
struct Homography {
  Mat3 h = Mat3::Identity();

  static Homography from_matrix(const Mat3& m);

  // Projects (u, v, 1); returns false when the mapped point is at infinity.
  bool apply(double u, double v, double* out_u, double* out_v) const;
};

// Dense per-pixel depth in meters. Valid pixels are positive and finite;
// invalid pixels are excluded from every reduction.
struct DepthMap {
  Raster<double> values;
  ValidityRaster valid;

  DepthMap() = default;
  DepthMap(int h, int w) : values(h, w, 0.0), valid(h, w, 0) {}

  int height() const { return values.height; }
  int width() const { return values.width; }
};

// Intensity raster with values in [0, 1], C in {1, 3}, plus validity for
// out-of-view pixels (warping marks samples that left the source frame).
struct ImageRaster {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;  // interleaved, size height * width * channels
  ValidityRaster valid;

  ImageRaster() = default;
  ImageRaster(int h, int w, int c, double fill = 0.0)
      : height(h),
        width(w),
        channels(c),
        data(static_cast<size_t>(h) * w * c, fill),
        valid(h, w, 1) {}

  double& at(int y, int x, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  // Luma conversion (0.299, 0.587, 0.114); identity for single-channel.
  ImageRaster to_gray() const;
};

// Pixel-center lattice; the homogeneous coordinate of pixel (u, v) is
// (u, v, 1) with integer coordinates at pixel centers.
struct PixelGrid {
  int width = 0;
  int height = 0;

  PixelGrid() = default;
  PixelGrid(int w, int h) : width(w), height(h) {}
  explicit PixelGrid(const CameraIntrinsics& k)
      : width(k.width), height(k.height) {}
};

// Dense per-pixel plane parameters with validity.
struct PlaneParamMap {
  int height = 0;
  int width = 0;
  std::vector<Vec3> params;
  ValidityRaster valid;

  PlaneParamMap() = default;
  PlaneParamMap(int h, int w)
      : height(h),
        width(w),
        params(static_cast<size_t>(h) * w, Vec3::Zero()),
        valid(h, w, 0) {}

  Vec3& at(int y, int x) { return params[static_cast<size_t>(y) * width + x]; }
  const Vec3& at(int y, int x) const {
    return params[static_cast<size_t>(y) * width + x];
  }
};

// Per-pixel foreground probability in [0, 1].
struct SoftMask {
  Raster<double> sigma;

  SoftMask() = default;
  SoftMask(int h, int w, double fill = 0.0) : sigma(h, w, fill) {}

  int height() const { return sigma.height; }
  int width() const { return sigma.width; }
};

struct PlaneInstance {
  SoftMask mask;
  double score = 0.5;  // detection confidence in (0, 1)
  std::optional<int> semantic_label;
  std::optional<PlaneParam> pooled_param;
};

using PlaneInstanceSet = std::vector<PlaneInstance>;

}  // namespace planar
