#pragma once

#include "planar/types.hpp"

namespace planar {

// Plane-induced homography between a posed view pair,
//   H = K_src (R - t p^T) K_tgt^-1,
// mapping target pixels to source pixels for points on the plane p.
// Throws std::invalid_argument("invalid plane") for degenerate p and
// "invalid pose" for a non-rigid pose.
Homography induce_homography(const PlaneParam& plane, const RelativePose& pose,
                             const CameraIntrinsics& k_tgt,
                             const CameraIntrinsics& k_src);

// Per-pixel depth of a single plane, D(u, v) = -1 / (p^T K^-1 (u, v, 1)).
// Pixels whose ray is parallel to the plane or hits it behind the camera
// (p^T K^-1 x >= -1e-12) are marked invalid.
DepthMap plane_to_depth(const PlaneParam& plane, const CameraIntrinsics& k,
                        const PixelGrid& grid);

// Back-projection: depth * K^-1 (u, v, 1). Throws for depth <= 0.
Vec3 depth_to_point(const CameraIntrinsics& k, double u, double v,
                    double depth);

// Depth of every pixel under its own plane parameter; invalid where the
// parameter is invalid or the plane lies behind the ray.
DepthMap param_map_to_depth(const PlaneParamMap& params,
                            const CameraIntrinsics& k);

}  // namespace planar
