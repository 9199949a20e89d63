#pragma once

#include <cstdint>
#include <vector>

#include "planar/geometry.hpp"
#include "planar/types.hpp"

namespace planar {

// Procedural texture: seeded value noise over in-plane coordinates, so both
// views observe the same Lambertian surface.
struct TextureParams {
  double cell_size = 0.3;   // base noise feature size (meters)
  double contrast = 0.8;    // peak-to-peak intensity span around 0.5
  bool textureless = false;
};

// One textured planar patch: the plane, a convex polygon in its in-plane
// 2D frame, and the texture seed.
struct ScenePlane {
  PlaneParam param;
  std::vector<Vec2> polygon;
  uint64_t texture_seed = 0;
};

// 2D frame attached to a plane; deterministic in p.
struct PlaneFrame {
  Vec3 origin;
  Vec3 axis_u;
  Vec3 axis_v;
  Vec3 normal;  // unit, e < 0 representation

  static PlaneFrame from_param(const PlaneParam& p);
  Vec2 project(const Vec3& point) const;
};

struct SceneSpec {
  std::vector<ScenePlane> planes;
  CameraIntrinsics intrinsics;
  RelativePose pose;  // target -> source
  double background_depth = 20.0;
  uint64_t background_texture_seed = 1;
  TextureParams texture;

  void validate() const;
};

struct RenderedPair {
  ImageRaster target;
  ImageRaster source;
  DepthMap gt_depth;
  Raster<uint16_t> gt_instance_ids;   // 0 = background
  std::vector<PlaneParam> gt_params;  // per instance, index = id - 1
};

// Per-pixel ray casting against the plane polygons (nearest hit wins) plus
// a fronto background plane. Deterministic in the spec.
RenderedPair render(const SceneSpec& spec, int threads = 1);

// Seeded piecewise-planar scene: n_planes patches tiling the frame in
// vertical bands, slants in [min_slant_deg, max_slant_deg] off the optical
// axis, every parameter strictly inside the default hypothesis hull, pose
// translation norm in [0.05, 0.15] m. Resamples on (near-)full occlusion.
SceneSpec sample_scene(uint64_t seed, int n_planes, double max_slant_deg,
                       double min_slant_deg = 0.0, int width = 128,
                       int height = 96);

// GT per-pixel plane parameters (background pixels carry the background
// plane).
PlaneParamMap gt_param_map(const RenderedPair& pair);

// Binary GT instance masks from the id raster, background excluded.
PlaneInstanceSet gt_instances(const RenderedPair& pair, double score = 0.9);

// Zero-mean Gaussian intensity noise, clamped to [0, 1]; deterministic.
ImageRaster add_noise(const ImageRaster& img, double sigma, uint64_t seed);

}  // namespace planar
