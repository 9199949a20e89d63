#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "planar/geometry.hpp"
#include "planar/hypothesis.hpp"
#include "planar/sweep.hpp"
#include "planar/synth.hpp"

using namespace planar;

TEST_SUITE("synth") {

TEST_CASE("a full-frame fronto plane renders constant depth") {
  SceneSpec spec;
  spec.intrinsics = {96.0, 96.0, 63.5, 47.5, 128, 96};
  spec.pose.translation = Vec3(0.08, 0.0, 0.0);
  ScenePlane plane;
  plane.param = PlaneParam::fronto(2.0);
  // A generous in-plane rectangle comfortably covering the frustum at 2 m.
  plane.polygon = {Vec2(-4, -4), Vec2(4, -4), Vec2(4, 4), Vec2(-4, 4)};
  plane.texture_seed = 5;
  spec.planes.push_back(plane);

  const RenderedPair pair = render(spec);
  for (int y = 0; y < 96; y += 5) {
    for (int x = 0; x < 128; x += 5) {
      REQUIRE(pair.gt_depth.valid.at(y, x));
      CHECK(pair.gt_instance_ids.at(y, x) == 1);
      CHECK(pair.gt_depth.values.at(y, x) ==
            doctest::Approx(2.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("GT depth satisfies the plane-to-depth identity exactly") {
  const SceneSpec spec = sample_scene(7, 3, 40.0, 10.0);
  const RenderedPair pair = render(spec);
  const CameraIntrinsics& k = spec.intrinsics;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const uint16_t id = pair.gt_instance_ids.at(y, x);
      if (id == 0) continue;
      const Vec3 p = pair.gt_params[id - 1].p;
      const double expect = -1.0 / p.dot(k.ray(x, y));
      CHECK(std::abs(pair.gt_depth.values.at(y, x) - expect) <= 1e-12);
    }
  }
}

TEST_CASE("renderer self-consistency: back-projections lie on the GT plane") {
  const SceneSpec spec = sample_scene(13, 2, 35.0, 5.0);
  const RenderedPair pair = render(spec);
  const CameraIntrinsics& k = spec.intrinsics;
  double max_residual = 0.0;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const uint16_t id = pair.gt_instance_ids.at(y, x);
      if (id == 0) continue;
      const Vec3 point =
          depth_to_point(k, x, y, pair.gt_depth.values.at(y, x));
      max_residual = std::max(
          max_residual, std::abs(pair.gt_params[id - 1].p.dot(point) + 1.0));
    }
  }
  CHECK(max_residual <= 1e-9);
}

TEST_CASE("both views observe the same surface intensity") {
  const SceneSpec spec = sample_scene(21, 2, 30.0, 0.0);
  const RenderedPair pair = render(spec);
  double err = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < spec.planes.size(); ++i) {
    const Homography h = induce_homography(spec.planes[i].param, spec.pose,
                                           spec.intrinsics, spec.intrinsics);
    const ImageRaster warped = warp_source(pair.source, h);
    for (int y = 0; y < warped.height; ++y) {
      for (int x = 0; x < warped.width; ++x) {
        if (pair.gt_instance_ids.at(y, x) != i + 1) continue;
        if (!warped.valid.at(y, x)) continue;
        err += std::abs(warped.at(y, x) - pair.target.at(y, x));
        ++n;
      }
    }
  }
  REQUIRE(n > 2000);
  CHECK(err / static_cast<double>(n) < 0.02);
}

TEST_CASE("sampling is deterministic and respects the hypothesis hull") {
  const SceneSpec a = sample_scene(42, 3, 40.0, 10.0);
  const SceneSpec b = sample_scene(42, 3, 40.0, 10.0);
  REQUIRE(a.planes.size() == b.planes.size());
  CHECK(a.pose.rotation == b.pose.rotation);
  CHECK(a.pose.translation == b.pose.translation);
  for (size_t i = 0; i < a.planes.size(); ++i) {
    CHECK(a.planes[i].param.p == b.planes[i].param.p);
    CHECK(a.planes[i].texture_seed == b.planes[i].texture_seed);
    REQUIRE(a.planes[i].polygon.size() == b.planes[i].polygon.size());
    for (size_t j = 0; j < a.planes[i].polygon.size(); ++j) {
      CHECK(a.planes[i].polygon[j] == b.planes[i].polygon[j]);
    }
  }

  const double t_norm = a.pose.translation.norm();
  CHECK(t_norm >= 0.05);
  CHECK(t_norm <= 0.15);

  std::vector<PlaneParam> params;
  for (const ScenePlane& pl : a.planes) params.push_back(pl.param);
  const auto coverage = grid_coverage(default_grid(), params);
  CHECK(coverage == std::array<double, 3>{1.0, 1.0, 1.0});
}

TEST_CASE("every requested plane stays visible") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const SceneSpec spec = sample_scene(seed, 3, 40.0, 5.0);
    const RenderedPair pair = render(spec);
    std::array<size_t, 4> count{};
    for (uint16_t id : pair.gt_instance_ids.data) {
      REQUIRE(id <= 3);
      ++count[id];
    }
    const size_t total = pair.gt_instance_ids.size();
    for (int i = 1; i <= 3; ++i) {
      CHECK(count[i] > total / 50);
    }
  }
}

TEST_CASE("rendering is deterministic") {
  const SceneSpec spec = sample_scene(77, 2, 25.0);
  const RenderedPair a = render(spec, 1);
  const RenderedPair b = render(spec, 3);
  CHECK(a.target.data == b.target.data);
  CHECK(a.source.data == b.source.data);
  CHECK(a.gt_depth.values.data == b.gt_depth.values.data);
  CHECK(a.gt_instance_ids.data == b.gt_instance_ids.data);
}

TEST_CASE("textureless mode renders flat planes") {
  SceneSpec spec = sample_scene(9, 1, 20.0);
  spec.texture.textureless = true;
  const RenderedPair pair = render(spec);
  for (double v : pair.target.data) CHECK(v == 0.5);
}

TEST_CASE("zero planes rejected") {
  SceneSpec spec;
  spec.intrinsics = {96.0, 96.0, 63.5, 47.5, 128, 96};
  CHECK_THROWS_AS(render(spec), std::invalid_argument);
}

TEST_CASE("gt_param_map and gt_instances reflect the id raster") {
  const SceneSpec spec = sample_scene(55, 2, 30.0, 10.0);
  const RenderedPair pair = render(spec);
  const PlaneParamMap map = gt_param_map(pair);
  const PlaneInstanceSet insts = gt_instances(pair);
  CHECK(insts.size() == 2);
  for (int y = 0; y < map.height; y += 4) {
    for (int x = 0; x < map.width; x += 4) {
      const uint16_t id = pair.gt_instance_ids.at(y, x);
      REQUIRE(map.valid.at(y, x));
      if (id > 0) {
        CHECK(map.at(y, x) == pair.gt_params[id - 1].p);
        CHECK(insts[id - 1].mask.sigma.at(y, x) == 1.0);
      } else {
        CHECK(map.at(y, x).z() ==
              doctest::Approx(-1.0 / spec.background_depth));
      }
    }
  }
}

TEST_CASE("noise is deterministic, zero-mean, and clamped") {
  const SceneSpec spec = sample_scene(88, 1, 10.0);
  const RenderedPair pair = render(spec);
  const ImageRaster a = add_noise(pair.target, 0.02, 9);
  const ImageRaster b = add_noise(pair.target, 0.02, 9);
  CHECK(a.data == b.data);
  double mean_shift = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    CHECK(a.data[i] >= 0.0);
    CHECK(a.data[i] <= 1.0);
    mean_shift += a.data[i] - pair.target.data[i];
  }
  mean_shift /= static_cast<double>(a.data.size());
  CHECK(std::abs(mean_shift) < 0.005);
}

}  // TEST_SUITE
