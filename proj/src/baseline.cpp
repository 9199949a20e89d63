#include "planar/baseline.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace planar {

DepthHypothesisSet DepthHypothesisSet::uniform_inverse(double min_depth,
                                                       double max_depth,
                                                       int count) {
  if (!(min_depth > 0.0) || !(max_depth > min_depth) || count < 2) {
    throw std::invalid_argument("invalid depth hypothesis range");
  }
  DepthHypothesisSet set;
  set.depths.resize(count);
  const double w_hi = 1.0 / min_depth;
  const double w_lo = 1.0 / max_depth;
  const double step = (w_hi - w_lo) / (count - 1);
  for (int i = 0; i < count; ++i) {
    // descending inverse depth -> ascending depth
    const double w = (i == count - 1) ? w_lo : w_hi - i * step;
    set.depths[i] = 1.0 / w;
  }
  return set;
}

std::vector<PlaneParam> DepthHypothesisSet::as_planes() const {
  validate();
  std::vector<PlaneParam> planes;
  planes.reserve(depths.size());
  for (double d : depths) {
    planes.push_back(PlaneParam::fronto(d));
  }
  return planes;
}

void DepthHypothesisSet::validate() const {
  if (depths.empty()) {
    throw std::invalid_argument("empty depth hypothesis set");
  }
  for (size_t i = 0; i < depths.size(); ++i) {
    if (!(depths[i] > 0.0) || !std::isfinite(depths[i]) ||
        (i > 0 && !(depths[i] > depths[i - 1]))) {
      throw std::invalid_argument(
          "depth hypotheses must be positive and strictly increasing");
    }
  }
}

DepthMap fronto_sweep(const ImageRaster& tgt, const ImageRaster& src,
                      const RelativePose& pose, const CameraIntrinsics& k_tgt,
                      const CameraIntrinsics& k_src,
                      const DepthHypothesisSet& depths,
                      const SweepConfig& config) {
  const std::vector<PlaneParam> planes = depths.as_planes();
  const SweepResult result =
      sweep(tgt, src, pose, k_tgt, k_src,
            std::span<const PlaneParam>(planes), config);
  return param_map_to_depth(result.params, k_tgt);
}

PlaneParam fit_plane_lsq(const DepthMap& depth, const SoftMask& mask,
                         const CameraIntrinsics& k, const PixelGrid& grid) {
  if (depth.height() != grid.height || depth.width() != grid.width ||
      mask.height() != grid.height || mask.width() != grid.width) {
    throw std::invalid_argument("fit_plane_lsq: dimension mismatch");
  }
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  size_t count = 0;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (!depth.valid.at(y, x) || !(mask.sigma.at(y, x) > 0.5)) continue;
      const Vec3 point = depth_to_point(k, x, y, depth.values.at(y, x));
      a += point * point.transpose();
      b -= point;
      ++count;
    }
  }
  if (count < 3) {
    throw std::invalid_argument("degenerate plane fit");
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(a);
  const Vec3 ev = eig.eigenvalues();
  if (!(ev(0) > 1e-12 * std::max(ev(2), 1.0))) {
    throw std::invalid_argument("degenerate plane fit");
  }
  return PlaneParam(Vec3(a.ldlt().solve(b)));
}

}  // namespace planar
