#pragma once

#include <vector>

#include "planar/sweep.hpp"

namespace planar {

// Strictly increasing positive depth hypotheses for a fronto-parallel sweep.
struct DepthHypothesisSet {
  std::vector<double> depths;

  // `count` samples uniform in inverse depth over [min_depth, max_depth].
  static DepthHypothesisSet uniform_inverse(double min_depth, double max_depth,
                                            int count);

  // The equivalent slanted hypotheses (0, 0, -1/d).
  std::vector<PlaneParam> as_planes() const;

  void validate() const;
};

// Conventional depth sweep: the slanted machinery restricted to the
// fronto-parallel grid {(0, 0, -1/d_j)}, followed by per-pixel plane-to-depth
// conversion at full resolution.
DepthMap fronto_sweep(const ImageRaster& tgt, const ImageRaster& src,
                      const RelativePose& pose, const CameraIntrinsics& k_tgt,
                      const CameraIntrinsics& k_src,
                      const DepthHypothesisSet& depths,
                      const SweepConfig& config);

// Least-squares plane fit min_p sum (p^T X_i + 1)^2 over back-projected
// foreground points (sigma > 0.5). Throws "degenerate plane fit" when the
// normal equations are rank deficient (collinear points or a plane through
// the camera origin).
PlaneParam fit_plane_lsq(const DepthMap& depth, const SoftMask& mask,
                         const CameraIntrinsics& k, const PixelGrid& grid);

}  // namespace planar
