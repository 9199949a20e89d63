#pragma once

#include "planar/geometry.hpp"
#include "planar/types.hpp"

namespace planar {

// Soft-pooled instance parameter: sum(sigma_i * p_i) / sum(sigma_i) over
// pixels valid in the parameter map. Throws "empty instance" when the
// masked weight is zero.
PlaneParam soft_pool(const PlaneParamMap& params, const SoftMask& mask);

// Planar depth of a pooled instance at its foreground pixels (sigma > 0.5,
// strict); all other pixels invalid.
DepthMap instance_depth(const PlaneParam& pooled, const SoftMask& mask,
                        const CameraIntrinsics& k, const PixelGrid& grid);

// Stitched planar depth: pixels claimed by an instance (sigma > 0.5) take
// that instance's pooled-plane depth, overlaps resolved by highest score
// (ties by instance order); unclaimed pixels fall back to the per-pixel
// parameter depth. Requires pooled_param on every instance.
DepthMap stitch_depth(const PlaneInstanceSet& instances,
                      const PlaneParamMap& params, const CameraIntrinsics& k,
                      const PixelGrid& grid);

// Mean absolute depth difference over jointly-valid pixels. Throws when the
// overlap is empty.
double soft_pooling_loss(const DepthMap& pred, const DepthMap& gt);

struct SegmentationConfig {
  double angle_tol_deg = 10.0;   // max normal angle between pixel and seed
  double offset_tol = 0.1;       // max | |p| - |p_seed| | (1/m)
  double min_area_frac = 0.005;  // discard regions below this image fraction
};

// Greedy 4-connected region growing over a plane-parameter map. Masks are
// binary; score is the region area fraction clamped to (0, 1). May return
// an empty set.
PlaneInstanceSet segment_planes(const PlaneParamMap& params,
                                const SegmentationConfig& config = {});

}  // namespace planar
