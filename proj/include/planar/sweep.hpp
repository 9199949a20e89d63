#pragma once

#include <span>
#include <vector>

#include "planar/geometry.hpp"
#include "planar/hypothesis.hpp"
#include "planar/types.hpp"

namespace planar {

// One matching-cost slice at the working resolution. Costs are 1 - ZNCC
// in [0, 2]; lower is a better match.
struct CostSlice {
  Raster<double> cost;
  ValidityRaster valid;
};

// N x h x w stack of matching costs, slice j belonging to hypothesis j.
struct CostVolume {
  int num_hypotheses = 0;
  int height = 0;
  int width = 0;
  std::vector<double> cost;
  std::vector<uint8_t> valid;

  CostVolume() = default;
  CostVolume(int n, int h, int w)
      : num_hypotheses(n),
        height(h),
        width(w),
        cost(static_cast<size_t>(n) * h * w, 0.0),
        valid(static_cast<size_t>(n) * h * w, 0) {}

  size_t index(int j, int y, int x) const {
    return (static_cast<size_t>(j) * height + y) * width + x;
  }
  double& at(int j, int y, int x) { return cost[index(j, y, x)]; }
  double at(int j, int y, int x) const { return cost[index(j, y, x)]; }
};

// Per-pixel distribution over hypotheses. For valid pixels the slice
// probabilities are nonnegative and sum to 1.
struct ProbabilityVolume {
  int num_hypotheses = 0;
  int height = 0;
  int width = 0;
  std::vector<double> prob;
  ValidityRaster valid;  // per pixel; invalid when no slice was valid

  ProbabilityVolume() = default;
  ProbabilityVolume(int n, int h, int w)
      : num_hypotheses(n),
        height(h),
        width(w),
        prob(static_cast<size_t>(n) * h * w, 0.0),
        valid(h, w, 0) {}

  size_t index(int j, int y, int x) const {
    return (static_cast<size_t>(j) * height + y) * width + x;
  }
  double& at(int j, int y, int x) { return prob[index(j, y, x)]; }
  double at(int j, int y, int x) const { return prob[index(j, y, x)]; }
};

// Per-coarse-pixel convex upsampling stencils: for every coarse cell an
// s x s block of fine pixels, each combining its 3x3 coarse neighborhood
// with nonnegative weights summing to 1.
struct ConvexWeights {
  int height = 0;  // coarse rows
  int width = 0;   // coarse cols
  int factor = 1;
  std::vector<double> w;  // (h, w, s, s, 3, 3)

  ConvexWeights() = default;
  ConvexWeights(int h, int wd, int s)
      : height(h),
        width(wd),
        factor(s),
        w(static_cast<size_t>(h) * wd * s * s * 9, 0.0) {}

  size_t index(int i, int j, int ky, int kx, int dy, int dx) const {
    return ((((static_cast<size_t>(i) * width + j) * factor + ky) * factor +
             kx) *
                3 +
            dy) *
               3 +
           dx;
  }
  double& at(int i, int j, int ky, int kx, int dy, int dx) {
    return w[index(i, j, ky, kx, dy, dx)];
  }
  double at(int i, int j, int ky, int kx, int dy, int dx) const {
    return w[index(i, j, ky, kx, dy, dx)];
  }

  // Stencils equivalent to clamped bilinear interpolation.
  static ConvexWeights bilinear(int h, int w, int s);

  void validate() const;
};

struct SweepConfig {
  int cost_window = 7;        // odd ZNCC window, working resolution
  int aggregation_radius = 2; // box-filter radius per cost slice
  double temperature = 0.05;  // softmax temperature on costs
  int working_scale = 4;      // cost volume at 1/scale resolution
  int upsample_factor = 4;    // convex upsample factor (== working_scale)
  int threads = 1;

  void validate() const;
};

struct SweepResult {
  PlaneParamMap params;         // full resolution
  PlaneParamMap params_coarse;  // working resolution
  ProbabilityVolume probability;
};

// Box-average downsample by an integer factor; a coarse pixel is valid only
// if all covered pixels are valid. Requires divisible dimensions.
ImageRaster downsample_box(const ImageRaster& img, int factor);

// Samples src at H-mapped pixel centers of a same-sized target raster with
// bilinear interpolation; samples falling outside src are invalid.
ImageRaster warp_source(const ImageRaster& src, const Homography& h);
ImageRaster warp_source(const ImageRaster& src, const Homography& h,
                        int out_height, int out_width);

// 1 - ZNCC over an odd square window. A cell is valid only when its window
// lies fully inside the rasters and contains no invalid pixel; windows with
// variance below 1e-8 on either side get the neutral cost 1.
CostSlice matching_cost(const ImageRaster& tgt, const ImageRaster& warped,
                        int window);

// Warp + match once per hypothesis at 1/scale resolution.
CostVolume build_cost_volume(const ImageRaster& tgt, const ImageRaster& src,
                             std::span<const PlaneParam> hypotheses,
                             const RelativePose& pose,
                             const CameraIntrinsics& k_tgt,
                             const CameraIntrinsics& k_src, int window,
                             int scale, int threads = 1);

// Per-slice masked box filter of the given radius; radius 0 is identity.
// Invalid cells stay invalid and are excluded from neighbor averages.
CostVolume aggregate_cost(const CostVolume& vol, int radius);

// Softmax of -cost / temperature across hypotheses, per pixel. Invalid
// slices get probability 0; pixels with no valid slice are invalid.
ProbabilityVolume cost_to_probability(const CostVolume& vol,
                                      double temperature);

// Probability-weighted sum of hypotheses per pixel.
PlaneParamMap soft_argmax(const ProbabilityVolume& u,
                          std::span<const PlaneParam> hypotheses);

// Each fine pixel is the convex combination of its 3x3 coarse neighbors
// (edges clamped). Throws on non-normalized weights.
PlaneParamMap convex_upsample(const PlaneParamMap& coarse,
                              const ConvexWeights& weights, int factor);

// Full pipeline: cost volume -> aggregation -> softmax -> soft-argmax ->
// convex upsample with bilinear-equivalent default weights.
SweepResult sweep(const ImageRaster& tgt, const ImageRaster& src,
                  const RelativePose& pose, const CameraIntrinsics& k_tgt,
                  const CameraIntrinsics& k_src, const HypothesisGrid& grid,
                  const SweepConfig& config);

SweepResult sweep(const ImageRaster& tgt, const ImageRaster& src,
                  const RelativePose& pose, const CameraIntrinsics& k_tgt,
                  const CameraIntrinsics& k_src,
                  std::span<const PlaneParam> hypotheses,
                  const SweepConfig& config);

}  // namespace planar
