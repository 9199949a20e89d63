#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "planar/instance.hpp"
#include "planar/synth.hpp"
#include "test_util.hpp"

using namespace planar;

namespace {

CameraIntrinsics small_intrinsics() {
  CameraIntrinsics k;
  k.fx = k.fy = 60.0;
  k.cx = 31.5;
  k.cy = 23.5;
  k.width = 64;
  k.height = 48;
  return k;
}

PlaneParamMap constant_map(int h, int w, const Vec3& p) {
  PlaneParamMap map(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      map.at(y, x) = p;
      map.valid.at(y, x) = 1;
    }
  }
  return map;
}

}  // namespace

TEST_SUITE("instance") {

TEST_CASE("soft pooling basics") {
  const Vec3 p(0.1, -0.4, -0.8);
  const PlaneParamMap map = constant_map(6, 8, p);
  SoftMask mask(6, 8, 0.0);
  mask.sigma.at(2, 3) = 0.25;
  mask.sigma.at(5, 7) = 0.9;
  CHECK((soft_pool(map, mask).p - p).cwiseAbs().maxCoeff() < 1e-15);

  // Two unit-weight pixels average arithmetically.
  PlaneParamMap two(1, 2);
  two.at(0, 0) = Vec3(0, 0, -0.5);
  two.at(0, 1) = Vec3(0, 0, -0.3);
  two.valid.at(0, 0) = two.valid.at(0, 1) = 1;
  SoftMask ones(1, 2, 1.0);
  CHECK((soft_pool(two, ones).p - Vec3(0, 0, -0.4)).cwiseAbs().maxCoeff() <
        1e-15);

  SoftMask zero(6, 8, 0.0);
  CHECK_THROWS_WITH_AS(soft_pool(map, zero), "empty instance",
                       std::invalid_argument);
}

TEST_CASE("soft pooling equals the direct weighted mean") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> pv(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    PlaneParamMap map(9, 11);
    SoftMask mask(9, 11, 0.0);
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 11; ++x) {
        map.at(y, x) = Vec3(pv(rng), pv(rng), pv(rng));
        map.valid.at(y, x) = u(rng) < 0.8;
        mask.sigma.at(y, x) = u(rng);
      }
    }
    const Vec3 got = soft_pool(map, mask).p;
    const Vec3 expect = oracle::weighted_mean(map, mask);
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("soft pooling is invariant to uniform mask scaling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlaneParamMap map(7, 7);
  SoftMask mask(7, 7, 0.0);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) {
      map.at(y, x) = Vec3(u(rng), u(rng), -u(rng) - 0.1);
      map.valid.at(y, x) = 1;
      mask.sigma.at(y, x) = u(rng);
    }
  }
  const Vec3 base = soft_pool(map, mask).p;
  for (double c : {0.05, 0.4, 1.0}) {
    SoftMask scaled = mask;
    for (double& s : scaled.sigma.data) s *= c;
    CHECK((soft_pool(map, scaled).p - base).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pooled parameter stays within the masked component ranges") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlaneParamMap map(8, 8);
  SoftMask mask(8, 8, 0.0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      map.at(y, x) = Vec3(u(rng), 2 * u(rng) - 1, -u(rng));
      map.valid.at(y, x) = 1;
      mask.sigma.at(y, x) = u(rng) < 0.5 ? 0.0 : u(rng);
    }
  }
  const Vec3 pooled = soft_pool(map, mask).p;
  Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (mask.sigma.at(y, x) <= 0.0) continue;
      lo = lo.cwiseMin(map.at(y, x));
      hi = hi.cwiseMax(map.at(y, x));
    }
  }
  for (int a = 0; a < 3; ++a) {
    CHECK(pooled[a] >= lo[a] - 1e-12);
    CHECK(pooled[a] <= hi[a] + 1e-12);
  }
}

TEST_CASE("instance depth respects the strict foreground threshold") {
  const CameraIntrinsics k = small_intrinsics();
  const PixelGrid grid(k);
  SoftMask full(k.height, k.width, 1.0);
  const DepthMap d =
      instance_depth(PlaneParam(0, 0, -0.5), full, k, grid);
  for (int y = 0; y < k.height; y += 9) {
    for (int x = 0; x < k.width; x += 9) {
      REQUIRE(d.valid.at(y, x));
      CHECK(d.values.at(y, x) == doctest::Approx(2.0).epsilon(1e-12));
    }
  }

  SoftMask half(k.height, k.width, 0.5);  // boundary value is background
  const DepthMap none =
      instance_depth(PlaneParam(0, 0, -0.5), half, k, grid);
  for (uint8_t v : none.valid.data) CHECK(v == 0);
}

TEST_CASE("stitching priorities and fallback") {
  const CameraIntrinsics k = small_intrinsics();
  const PixelGrid grid(k);
  const PlaneParamMap map = constant_map(k.height, k.width, Vec3(0, 0, -1.0));

  SUBCASE("no instances: stitched equals the per-pixel depth") {
    const DepthMap stitched = stitch_depth({}, map, k, grid);
    const DepthMap pixelwise = param_map_to_depth(map, k);
    CHECK(stitched.values.data == pixelwise.values.data);
    CHECK(stitched.valid.data == pixelwise.valid.data);
  }

  SUBCASE("one full-frame instance wins everywhere") {
    PlaneInstance inst;
    inst.mask = SoftMask(k.height, k.width, 1.0);
    inst.score = 0.8;
    inst.pooled_param = PlaneParam(0, 0, -0.5);
    const DepthMap stitched = stitch_depth({inst}, map, k, grid);
    for (int y = 0; y < k.height; y += 7) {
      for (int x = 0; x < k.width; x += 7) {
        CHECK(stitched.values.at(y, x) == doctest::Approx(2.0).epsilon(1e-12));
      }
    }
  }

  SUBCASE("overlap goes to the higher score") {
    PlaneInstance weak, strong;
    weak.mask = SoftMask(k.height, k.width, 1.0);
    weak.score = 0.6;
    weak.pooled_param = PlaneParam(0, 0, -0.25);  // depth 4
    strong.mask = SoftMask(k.height, k.width, 0.0);
    for (int y = 0; y < k.height; ++y) {
      for (int x = 0; x < k.width / 2; ++x) strong.mask.sigma.at(y, x) = 1.0;
    }
    strong.score = 0.9;
    strong.pooled_param = PlaneParam(0, 0, -0.5);  // depth 2
    const DepthMap stitched = stitch_depth({weak, strong}, map, k, grid);
    CHECK(stitched.values.at(10, 5) == doctest::Approx(2.0));   // overlap
    CHECK(stitched.values.at(10, k.width - 5) == doctest::Approx(4.0));
  }
}

TEST_CASE("every pixel valid in the parameter map is valid after stitching") {
  const CameraIntrinsics k = small_intrinsics();
  const PixelGrid grid(k);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlaneParamMap map(k.height, k.width);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      map.at(y, x) = Vec3(0.3 * u(rng), 0.3 * u(rng), -0.4 - u(rng));
      map.valid.at(y, x) = u(rng) < 0.7;
    }
  }
  PlaneInstance inst;
  inst.mask = SoftMask(k.height, k.width, 0.0);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      inst.mask.sigma.at(y, x) = u(rng);
    }
  }
  inst.score = 0.7;
  // A plane behind part of the frustum: forces the per-pixel fallback.
  inst.pooled_param = PlaneParam(2.0, 0.0, -0.1);
  const DepthMap stitched = stitch_depth({inst}, map, k, grid);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (map.valid.at(y, x)) CHECK(stitched.valid.at(y, x));
    }
  }
}

TEST_CASE("soft pooling loss") {
  const CameraIntrinsics k = small_intrinsics();
  const PixelGrid grid(k);
  const DepthMap a = plane_to_depth(PlaneParam(0, 0, -0.5), k, grid);
  CHECK(soft_pooling_loss(a, a) == 0.0);

  DepthMap b = a;
  for (double& v : b.values.data) v += 0.1;
  CHECK(soft_pooling_loss(b, a) == doctest::Approx(0.1).epsilon(1e-12));

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    DepthMap p(10, 9), g(10, 9);
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 9; ++x) {
        p.values.at(y, x) = u(rng);
        g.values.at(y, x) = u(rng);
        p.valid.at(y, x) = coin(rng) < 0.8;
        g.valid.at(y, x) = coin(rng) < 0.8;
      }
    }
    p.valid.at(0, 0) = g.valid.at(0, 0) = 1;  // guarantee overlap
    CHECK(std::abs(soft_pooling_loss(p, g) - oracle::masked_l1(p, g)) <=
          1e-12);
  }

  DepthMap empty_a(4, 4), empty_b(4, 4);
  CHECK_THROWS_AS(soft_pooling_loss(empty_a, empty_b), std::invalid_argument);
}

TEST_CASE("segmentation of simple maps") {
  SUBCASE("constant map gives one full-frame instance") {
    const PlaneParamMap map = constant_map(20, 30, Vec3(0.1, 0.0, -0.5));
    const PlaneInstanceSet set = segment_planes(map);
    REQUIRE(set.size() == 1);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 30; ++x) {
        CHECK(set[0].mask.sigma.at(y, x) == 1.0);
      }
    }
    CHECK(set[0].score > 0.0);
    CHECK(set[0].score < 1.0);
  }

  SUBCASE("two half-frames with orthogonal normals split in two") {
    PlaneParamMap map(16, 24);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 24; ++x) {
        map.at(y, x) = x < 12 ? Vec3(0, 0, -0.5) : Vec3(-0.5, 0, 0);
        map.valid.at(y, x) = 1;
      }
    }
    const PlaneInstanceSet set = segment_planes(map);
    REQUIRE(set.size() == 2);
    CHECK(set[0].mask.sigma.at(0, 0) == 1.0);
    CHECK(set[0].mask.sigma.at(0, 23) == 0.0);
    CHECK(set[1].mask.sigma.at(0, 23) == 1.0);
  }
}

TEST_CASE("segmentation recovers the GT instances of a 3-plane scene") {
  // Three bands with well-separated parameters (the region-growing gates
  // are angle and |p| differences, so the planes must differ in both).
  const CameraIntrinsics k = testutil::default_camera();
  SceneSpec spec;
  spec.intrinsics = k;
  spec.pose.translation = Vec3(0.1, 0.02, 0.0);
  const double band = k.width / 3.0;
  spec.planes.push_back(testutil::band_plane(
      k, testutil::plane_through(k, 0.5 * band, k.cy, 1.8, Vec3(0, 0, 1)),
      -8, -8, band + 4, k.height + 8, 11));
  spec.planes.push_back(testutil::band_plane(
      k,
      testutil::plane_through(k, 1.5 * band, k.cy, 2.4,
                              Vec3(std::sin(0.6), 0, std::cos(0.6))),
      band - 4, -8, 2 * band + 4, k.height + 8, 22));
  spec.planes.push_back(testutil::band_plane(
      k,
      testutil::plane_through(k, 2.5 * band, k.cy, 3.0,
                              Vec3(0, std::sin(0.6), std::cos(0.6))),
      2 * band - 4, -8, k.width + 8, k.height + 8, 33));
  const RenderedPair pair = render(spec);
  const PlaneParamMap gt_map = gt_param_map(pair);
  const PlaneInstanceSet segs = segment_planes(gt_map);
  const PlaneInstanceSet gts = gt_instances(pair);
  REQUIRE(gts.size() == 3);
  REQUIRE(segs.size() >= 3);

  // Every GT instance must be matched by some segment with IoU >= 0.95.
  for (const PlaneInstance& gt : gts) {
    double best = 0.0;
    for (const PlaneInstance& seg : segs) {
      size_t inter = 0, uni = 0;
      for (int y = 0; y < gt.mask.height(); ++y) {
        for (int x = 0; x < gt.mask.width(); ++x) {
          const bool a = gt.mask.sigma.at(y, x) > 0.5;
          const bool b = seg.mask.sigma.at(y, x) > 0.5;
          inter += a && b;
          uni += a || b;
        }
      }
      best = std::max(best, static_cast<double>(inter) /
                                static_cast<double>(uni));
    }
    CHECK(best >= 0.95);
  }
}

}  // TEST_SUITE
