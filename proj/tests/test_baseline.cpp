#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "planar/baseline.hpp"
#include "planar/synth.hpp"
#include "test_util.hpp"

using namespace planar;

TEST_SUITE("baseline") {

TEST_CASE("inverse-depth hypothesis spacing") {
  const DepthHypothesisSet set = DepthHypothesisSet::uniform_inverse(0.25, 10.0, 128);
  REQUIRE(set.depths.size() == 128);
  CHECK(set.depths.front() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(set.depths.back() == doctest::Approx(10.0).epsilon(1e-12));
  for (size_t i = 1; i < set.depths.size(); ++i) {
    CHECK(set.depths[i] > set.depths[i - 1]);
    const double dw = 1.0 / set.depths[i - 1] - 1.0 / set.depths[i];
    CHECK(dw == doctest::Approx((1.0 / 0.25 - 1.0 / 10.0) / 127).epsilon(1e-9));
  }
  CHECK_THROWS_AS(DepthHypothesisSet::uniform_inverse(0.0, 1.0, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(DepthHypothesisSet::uniform_inverse(1.0, 1.0, 8),
                  std::invalid_argument);
}

TEST_CASE("fronto sweep recovers a fronto-parallel plane") {
  // A fronto plane strictly inside the hypothesis hull, with a strong
  // lateral baseline so the inverse-depth cost valley is narrow relative
  // to the distance from the hull edges (otherwise truncation of the
  // softmax mass biases the soft-argmax).
  const CameraIntrinsics k = testutil::default_camera();
  const double gt_depth = 2.05;
  SceneSpec spec;
  spec.intrinsics = k;
  spec.pose.translation = Vec3(0.15, 0.0, 0.0);
  // Margin covers the source-view disparity plus the cost-window reach.
  spec.planes.push_back(testutil::band_plane(
      k, PlaneParam::fronto(gt_depth), -48, -48, k.width + 48, k.height + 48,
      7));
  const RenderedPair pair = render(spec);

  const DepthHypothesisSet depths =
      DepthHypothesisSet::uniform_inverse(0.5, 8.0, 96);
  SweepConfig cfg;
  cfg.working_scale = 4;
  cfg.upsample_factor = 4;
  cfg.temperature = 0.005;
  cfg.threads = 2;
  const DepthMap depth = fronto_sweep(pair.target, pair.source, spec.pose,
                                      spec.intrinsics, spec.intrinsics, depths,
                                      cfg);

  // Tolerance: half the local hypothesis spacing around the GT depth.
  double below = 0.0, above = 1e9;
  for (double d : depths.depths) {
    if (d <= gt_depth) below = d;
    if (d >= gt_depth && above > 1e8) above = d;
  }
  const double tol = 0.5 * (above - below) + 1e-9;
  // Check the fully-observable interior: near the right border the
  // near-depth hypotheses warp out of the source frame, which clips the
  // softmax support and legitimately biases the soft-argmax there.
  const double max_shift =
      k.fx * spec.pose.translation.norm() / depths.depths.front();
  const int x_hi = k.width - 1 - static_cast<int>(max_shift + 32.0);
  size_t checked = 0;
  for (int y = 0; y < depth.height(); y += 3) {
    for (int x = 0; x < x_hi; x += 3) {
      if (!depth.valid.at(y, x)) continue;
      if (pair.gt_instance_ids.at(y, x) != 1) continue;
      CHECK(std::abs(depth.values.at(y, x) - gt_depth) <= tol);
      ++checked;
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("zero baseline degenerates to the hypothesis centroid depth") {
  const SceneSpec spec = sample_scene(29, 1, 20.0);
  const RenderedPair pair = render(spec);
  const DepthHypothesisSet depths =
      DepthHypothesisSet::uniform_inverse(1.0, 4.0, 16);
  SweepConfig cfg;
  cfg.threads = 2;
  const DepthMap depth =
      fronto_sweep(pair.target, pair.target, RelativePose{}, spec.intrinsics,
                   spec.intrinsics, depths, cfg);
  // Uniform probability: the pooled plane parameter is the mean of
  // (0, 0, -1/d_j), so the depth is the harmonic mean of the hypotheses.
  double mean_pz = 0.0;
  for (double d : depths.depths) mean_pz += -1.0 / d;
  mean_pz /= static_cast<double>(depths.depths.size());
  const double expect = -1.0 / mean_pz;
  for (int y = 0; y < depth.height(); y += 5) {
    for (int x = 0; x < depth.width(); x += 5) {
      if (!depth.valid.at(y, x)) continue;
      CHECK(depth.values.at(y, x) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("fronto sweep equals the restricted slanted sweep") {
  const SceneSpec spec = sample_scene(37, 2, 25.0);
  const RenderedPair pair = render(spec);
  const DepthHypothesisSet depths =
      DepthHypothesisSet::uniform_inverse(0.8, 5.0, 32);
  SweepConfig cfg;
  cfg.threads = 2;
  const DepthMap direct = fronto_sweep(pair.target, pair.source, spec.pose,
                                       spec.intrinsics, spec.intrinsics,
                                       depths, cfg);
  const std::vector<PlaneParam> restricted = depths.as_planes();
  const SweepResult slanted =
      sweep(pair.target, pair.source, spec.pose, spec.intrinsics,
            spec.intrinsics, restricted, cfg);
  const DepthMap via_params = param_map_to_depth(slanted.params, spec.intrinsics);
  REQUIRE(direct.height() == via_params.height());
  for (int y = 0; y < direct.height(); ++y) {
    for (int x = 0; x < direct.width(); ++x) {
      CHECK(direct.valid.at(y, x) == via_params.valid.at(y, x));
      if (direct.valid.at(y, x)) {
        CHECK(std::abs(direct.values.at(y, x) - via_params.values.at(y, x)) <=
              1e-9);
      }
    }
  }
}

TEST_CASE("least-squares plane fit") {
  CameraIntrinsics k;
  k.fx = k.fy = 80.0;
  k.cx = 39.5;
  k.cy = 29.5;
  k.width = 80;
  k.height = 60;
  const PixelGrid grid(k);

  SUBCASE("noiseless depths recover the plane") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
      const PlaneParam p(u(rng), u(rng),
                         std::uniform_real_distribution<double>(-1.2, -0.4)(rng));
      const DepthMap depth = plane_to_depth(p, k, grid);
      const SoftMask full(k.height, k.width, 1.0);
      const PlaneParam fit = fit_plane_lsq(depth, full, k, grid);
      CHECK((fit.p - p.p).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  SUBCASE("three exact points interpolate") {
    const PlaneParam p(0.2, -0.1, -0.5);
    const DepthMap depth = plane_to_depth(p, k, grid);
    SoftMask three(k.height, k.width, 0.0);
    three.sigma.at(5, 7) = 1.0;
    three.sigma.at(40, 60) = 1.0;
    three.sigma.at(20, 33) = 1.0;
    const PlaneParam fit = fit_plane_lsq(depth, three, k, grid);
    CHECK((fit.p - p.p).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("collinear points are degenerate") {
    const DepthMap depth = plane_to_depth(PlaneParam(0, 0, -0.5), k, grid);
    SoftMask row(k.height, k.width, 0.0);
    for (int x = 0; x < k.width; ++x) row.sigma.at(10, x) = 1.0;
    CHECK_THROWS_WITH_AS(fit_plane_lsq(depth, row, k, grid),
                         "degenerate plane fit", std::invalid_argument);
  }

  SUBCASE("too few points") {
    const DepthMap depth = plane_to_depth(PlaneParam(0, 0, -0.5), k, grid);
    SoftMask two(k.height, k.width, 0.0);
    two.sigma.at(1, 1) = 1.0;
    two.sigma.at(30, 40) = 1.0;
    CHECK_THROWS_AS(fit_plane_lsq(depth, two, k, grid), std::invalid_argument);
  }

  SUBCASE("plane through the camera origin is rejected") {
    // Points on y = 0: a plane containing the origin, p unbounded.
    DepthMap depth(k.height, k.width);
    SoftMask mask(k.height, k.width, 0.0);
    // One image row with varying depth: the points span the 2D subspace
    // through the camera center and the row, so the fitted plane would
    // contain the origin.
    const int y0 = static_cast<int>(k.cy);
    for (int x = 0; x < k.width; ++x) {
      depth.values.at(y0, x) = 1.0 + 0.01 * x;
      depth.valid.at(y0, x) = 1;
      mask.sigma.at(y0, x) = 1.0;
    }
    CHECK_THROWS_AS(fit_plane_lsq(depth, mask, k, grid),
                    std::invalid_argument);
  }
}

TEST_CASE("plane fit round trip over random planes") {
  CameraIntrinsics k;
  k.fx = k.fy = 70.0;
  k.cx = 31.5;
  k.cy = 23.5;
  k.width = 64;
  k.height = 48;
  const PixelGrid grid(k);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  const SoftMask full(k.height, k.width, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const PlaneParam p(u(rng), u(rng),
                       std::uniform_real_distribution<double>(-1.0, -0.5)(rng));
    const DepthMap depth = plane_to_depth(p, k, grid);
    bool all_valid = true;
    for (uint8_t v : depth.valid.data) all_valid = all_valid && v;
    if (!all_valid) continue;
    const PlaneParam fit = fit_plane_lsq(depth, full, k, grid);
    CHECK((fit.p - p.p).cwiseAbs().maxCoeff() < 1e-6);
  }
}

}  // TEST_SUITE
