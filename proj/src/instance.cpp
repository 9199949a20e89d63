#include "planar/instance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace planar {

PlaneParam soft_pool(const PlaneParamMap& params, const SoftMask& mask) {
  if (mask.height() != params.height || mask.width() != params.width) {
    throw std::invalid_argument("soft_pool: dimension mismatch");
  }
  Vec3 acc = Vec3::Zero();
  double wsum = 0.0;
  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      if (!params.valid.at(y, x)) continue;
      const double s = mask.sigma.at(y, x);
      if (s <= 0.0) continue;
      acc += s * params.at(y, x);
      wsum += s;
    }
  }
  if (wsum <= 0.0) {
    throw std::invalid_argument("empty instance");
  }
  return PlaneParam(acc / wsum);
}

DepthMap instance_depth(const PlaneParam& pooled, const SoftMask& mask,
                        const CameraIntrinsics& k, const PixelGrid& grid) {
  pooled.validate();
  if (mask.height() != grid.height || mask.width() != grid.width) {
    throw std::invalid_argument("instance_depth: dimension mismatch");
  }
  const DepthMap plane = plane_to_depth(pooled, k, grid);
  DepthMap out(grid.height, grid.width);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (mask.sigma.at(y, x) > 0.5 && plane.valid.at(y, x)) {
        out.values.at(y, x) = plane.values.at(y, x);
        out.valid.at(y, x) = 1;
      }
    }
  }
  return out;
}

DepthMap stitch_depth(const PlaneInstanceSet& instances,
                      const PlaneParamMap& params, const CameraIntrinsics& k,
                      const PixelGrid& grid) {
  for (const PlaneInstance& inst : instances) {
    if (!inst.pooled_param.has_value()) {
      throw std::invalid_argument("stitch_depth: instance without pooled parameter");
    }
    if (inst.mask.height() != grid.height || inst.mask.width() != grid.width) {
      throw std::invalid_argument("stitch_depth: mask dimension mismatch");
    }
  }
  if (params.height != grid.height || params.width != grid.width) {
    throw std::invalid_argument("stitch_depth: parameter map dimension mismatch");
  }

  // Instances ordered by descending score; ties keep input order.
  std::vector<int> order(instances.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return instances[a].score > instances[b].score;
  });

  std::vector<DepthMap> plane_depths(instances.size());
  for (size_t i = 0; i < instances.size(); ++i) {
    plane_depths[i] = plane_to_depth(*instances[i].pooled_param, k, grid);
  }
  const DepthMap pixelwise = param_map_to_depth(params, k);

  DepthMap out(grid.height, grid.width);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      bool done = false;
      for (int i : order) {
        if (instances[i].mask.sigma.at(y, x) > 0.5 &&
            plane_depths[i].valid.at(y, x)) {
          out.values.at(y, x) = plane_depths[i].values.at(y, x);
          out.valid.at(y, x) = 1;
          done = true;
          break;
        }
      }
      if (!done && pixelwise.valid.at(y, x)) {
        out.values.at(y, x) = pixelwise.values.at(y, x);
        out.valid.at(y, x) = 1;
      }
    }
  }
  return out;
}

double soft_pooling_loss(const DepthMap& pred, const DepthMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw std::invalid_argument("soft_pooling_loss: dimension mismatch");
  }
  double sum = 0.0;
  size_t count = 0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred.valid.at(y, x) || !gt.valid.at(y, x)) continue;
      sum += std::abs(pred.values.at(y, x) - gt.values.at(y, x));
      ++count;
    }
  }
  if (count == 0) {
    throw std::invalid_argument("no jointly-valid pixel");
  }
  return sum / static_cast<double>(count);
}

PlaneInstanceSet segment_planes(const PlaneParamMap& params,
                                const SegmentationConfig& config) {
  const int h = params.height;
  const int w = params.width;
  const double cos_tol =
      std::cos(config.angle_tol_deg * std::numbers::pi / 180.0);
  const size_t min_area = std::max<size_t>(
      1, static_cast<size_t>(std::llround(config.min_area_frac * h * w)));

  Raster<int> label(h, w, -1);
  PlaneInstanceSet out;
  const int dy[4] = {-1, 1, 0, 0};
  const int dx[4] = {0, 0, -1, 1};

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (label.at(sy, sx) != -1 || !params.valid.at(sy, sx)) continue;
      const Vec3 seed = params.at(sy, sx);
      const double seed_norm = seed.norm();
      if (!(seed_norm > 0.0)) continue;
      const Vec3 seed_dir = seed / seed_norm;

      std::vector<std::pair<int, int>> region;
      std::deque<std::pair<int, int>> queue;
      label.at(sy, sx) = static_cast<int>(out.size());
      queue.emplace_back(sy, sx);
      while (!queue.empty()) {
        const auto [y, x] = queue.front();
        queue.pop_front();
        region.emplace_back(y, x);
        for (int d = 0; d < 4; ++d) {
          const int ny = y + dy[d];
          const int nx = x + dx[d];
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          if (label.at(ny, nx) != -1 || !params.valid.at(ny, nx)) continue;
          const Vec3 q = params.at(ny, nx);
          const double qn = q.norm();
          if (!(qn > 0.0)) continue;
          if (seed_dir.dot(q / qn) < cos_tol) continue;
          if (std::abs(qn - seed_norm) > config.offset_tol) continue;
          label.at(ny, nx) = static_cast<int>(out.size());
          queue.emplace_back(ny, nx);
        }
      }

      if (region.size() < min_area) {
        for (const auto& [y, x] : region) label.at(y, x) = -2;  // discarded
        continue;
      }
      PlaneInstance inst;
      inst.mask = SoftMask(h, w, 0.0);
      for (const auto& [y, x] : region) inst.mask.sigma.at(y, x) = 1.0;
      const double frac =
          static_cast<double>(region.size()) / static_cast<double>(h) / w;
      inst.score = std::clamp(frac, 1e-6, 1.0 - 1e-6);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

}  // namespace planar
