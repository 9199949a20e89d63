#include "planar/sweep.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "planar/parallel.hpp"

namespace planar {

namespace {

constexpr double kVarianceFloor = 1e-8;

// Integral image with one extra row/column: S(y, x) spans [0, y) x [0, x).
struct Integral {
  int height = 0;
  int width = 0;
  std::vector<double> s;

  explicit Integral(const Raster<double>& r) : height(r.height), width(r.width) {
    s.assign(static_cast<size_t>(height + 1) * (width + 1), 0.0);
    for (int y = 0; y < height; ++y) {
      double row = 0.0;
      for (int x = 0; x < width; ++x) {
        row += r.at(y, x);
        s[idx(y + 1, x + 1)] = s[idx(y, x + 1)] + row;
      }
    }
  }

  size_t idx(int y, int x) const {
    return static_cast<size_t>(y) * (width + 1) + x;
  }

  // Sum over rows [y0, y1) and columns [x0, x1).
  double rect(int y0, int x0, int y1, int x1) const {
    return s[idx(y1, x1)] - s[idx(y0, x1)] - s[idx(y1, x0)] + s[idx(y0, x0)];
  }
};

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void SweepConfig::validate() const {
  if (cost_window < 1 || cost_window % 2 == 0) {
    throw std::invalid_argument("cost window must be odd and >= 1");
  }
  if (aggregation_radius < 0) {
    throw std::invalid_argument("aggregation radius must be >= 0");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  if (working_scale != 1 && working_scale != 2 && working_scale != 4 &&
      working_scale != 8) {
    throw std::invalid_argument("working scale must be one of {1,2,4,8}");
  }
  if (upsample_factor < 1) {
    throw std::invalid_argument("upsample factor must be >= 1");
  }
}

ImageRaster downsample_box(const ImageRaster& img, int factor) {
  if (factor < 1 || img.height % factor != 0 || img.width % factor != 0) {
    throw std::invalid_argument(
        "image dimensions not divisible by working scale");
  }
  if (factor == 1) return img;
  ImageRaster out(img.height / factor, img.width / factor, img.channels);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      bool ok = true;
      for (int dy = 0; dy < factor && ok; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          if (!img.valid.at(y * factor + dy, x * factor + dx)) {
            ok = false;
            break;
          }
        }
      }
      out.valid.at(y, x) = ok ? 1 : 0;
      if (!ok) continue;
      for (int c = 0; c < img.channels; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            sum += img.at(y * factor + dy, x * factor + dx, c);
          }
        }
        out.at(y, x, c) = sum * inv;
      }
    }
  }
  return out;
}

ImageRaster warp_source(const ImageRaster& src, const Homography& h) {
  return warp_source(src, h, src.height, src.width);
}

ImageRaster warp_source(const ImageRaster& src, const Homography& h,
                        int out_height, int out_width) {
  ImageRaster out(out_height, out_width, src.channels);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      out.valid.at(y, x) = 0;
      double u, v;
      if (!h.apply(x, y, &u, &v)) continue;
      if (!(u >= 0.0 && u <= src.width - 1.0 && v >= 0.0 &&
            v <= src.height - 1.0)) {
        continue;
      }
      int x0 = static_cast<int>(std::floor(u));
      int y0 = static_cast<int>(std::floor(v));
      if (x0 == src.width - 1) --x0;   // u == width-1 exactly
      if (y0 == src.height - 1) --y0;  // v == height-1 exactly
      const double fx = u - x0;
      const double fy = v - y0;
      if (!src.valid.at(y0, x0) || !src.valid.at(y0, x0 + 1) ||
          !src.valid.at(y0 + 1, x0) || !src.valid.at(y0 + 1, x0 + 1)) {
        continue;
      }
      out.valid.at(y, x) = 1;
      for (int c = 0; c < src.channels; ++c) {
        const double v00 = src.at(y0, x0, c);
        const double v01 = src.at(y0, x0 + 1, c);
        const double v10 = src.at(y0 + 1, x0, c);
        const double v11 = src.at(y0 + 1, x0 + 1, c);
        out.at(y, x, c) = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                          fy * ((1.0 - fx) * v10 + fx * v11);
      }
    }
  }
  return out;
}

CostSlice matching_cost(const ImageRaster& tgt_in, const ImageRaster& warped_in,
                        int window) {
  if (tgt_in.height != warped_in.height || tgt_in.width != warped_in.width) {
    throw std::invalid_argument("matching_cost: dimension mismatch");
  }
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("cost window must be odd and >= 1");
  }
  const ImageRaster tgt = tgt_in.channels == 1 ? tgt_in : tgt_in.to_gray();
  const ImageRaster wrp =
      warped_in.channels == 1 ? warped_in : warped_in.to_gray();

  const int h = tgt.height;
  const int w = tgt.width;
  Raster<double> vmask(h, w, 0.0), t(h, w, 0.0), s(h, w, 0.0), tt(h, w, 0.0),
      ss(h, w, 0.0), ts(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!tgt.valid.at(y, x) || !wrp.valid.at(y, x)) continue;
      const double a = tgt.at(y, x);
      const double b = wrp.at(y, x);
      vmask.at(y, x) = 1.0;
      t.at(y, x) = a;
      s.at(y, x) = b;
      tt.at(y, x) = a * a;
      ss.at(y, x) = b * b;
      ts.at(y, x) = a * b;
    }
  }
  const Integral iv(vmask), it(t), is(s), itt(tt), iss(ss), its(ts);

  CostSlice out;
  out.cost = Raster<double>(h, w, 0.0);
  out.valid = ValidityRaster(h, w, 0);
  const int r = window / 2;
  const double n = static_cast<double>(window) * window;
  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      const int y0 = y - r, y1 = y + r + 1, x0 = x - r, x1 = x + r + 1;
      const double count = iv.rect(y0, x0, y1, x1);
      if (count < n - 0.5) continue;  // window touches an invalid pixel
      const double mt = it.rect(y0, x0, y1, x1) / n;
      const double ms = is.rect(y0, x0, y1, x1) / n;
      const double vt = std::max(0.0, itt.rect(y0, x0, y1, x1) / n - mt * mt);
      const double vs = std::max(0.0, iss.rect(y0, x0, y1, x1) / n - ms * ms);
      out.valid.at(y, x) = 1;
      if (vt < kVarianceFloor || vs < kVarianceFloor) {
        out.cost.at(y, x) = 1.0;  // textureless: neutral
        continue;
      }
      const double cov = its.rect(y0, x0, y1, x1) / n - mt * ms;
      double zncc = cov / std::sqrt(vt * vs);
      zncc = std::clamp(zncc, -1.0, 1.0);
      out.cost.at(y, x) = 1.0 - zncc;
    }
  }
  return out;
}

CostVolume build_cost_volume(const ImageRaster& tgt, const ImageRaster& src,
                             std::span<const PlaneParam> hypotheses,
                             const RelativePose& pose,
                             const CameraIntrinsics& k_tgt,
                             const CameraIntrinsics& k_src, int window,
                             int scale, int threads) {
  if (hypotheses.empty()) {
    throw std::invalid_argument("empty hypothesis set");
  }
  if (tgt.height != k_tgt.height || tgt.width != k_tgt.width ||
      src.height != k_src.height || src.width != k_src.width) {
    throw std::invalid_argument("image dimensions do not match intrinsics");
  }
  pose.validate();
  const ImageRaster tgt_s = downsample_box(tgt.to_gray(), scale);
  const ImageRaster src_s = downsample_box(src.to_gray(), scale);
  const CameraIntrinsics kt = k_tgt.scaled(scale);
  const CameraIntrinsics ks = k_src.scaled(scale);

  const int n = static_cast<int>(hypotheses.size());
  CostVolume vol(n, tgt_s.height, tgt_s.width);
  parallel_for(0, n, resolve_threads(threads), [&](int j) {
    const Homography h = induce_homography(hypotheses[j], pose, kt, ks);
    const ImageRaster warped = warp_source(src_s, h, tgt_s.height, tgt_s.width);
    const CostSlice slice = matching_cost(tgt_s, warped, window);
    for (int y = 0; y < vol.height; ++y) {
      for (int x = 0; x < vol.width; ++x) {
        vol.at(j, y, x) = slice.cost.at(y, x);
        vol.valid[vol.index(j, y, x)] = slice.valid.at(y, x);
      }
    }
  });
  return vol;
}

CostVolume aggregate_cost(const CostVolume& vol, int radius) {
  if (radius < 0) {
    throw std::invalid_argument("aggregation radius must be >= 0");
  }
  if (radius == 0) return vol;
  CostVolume out(vol.num_hypotheses, vol.height, vol.width);
  const int h = vol.height;
  const int w = vol.width;
  Raster<double> vmask(h, w, 0.0), cv(h, w, 0.0);
  for (int j = 0; j < vol.num_hypotheses; ++j) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool ok = vol.valid[vol.index(j, y, x)] != 0;
        vmask.at(y, x) = ok ? 1.0 : 0.0;
        cv.at(y, x) = ok ? vol.at(j, y, x) : 0.0;
      }
    }
    const Integral iv(vmask), ic(cv);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t k = vol.index(j, y, x);
        if (!vol.valid[k]) continue;
        const int y0 = std::max(0, y - radius), y1 = std::min(h, y + radius + 1);
        const int x0 = std::max(0, x - radius), x1 = std::min(w, x + radius + 1);
        const double count = iv.rect(y0, x0, y1, x1);
        out.cost[k] = ic.rect(y0, x0, y1, x1) / count;
        out.valid[k] = 1;
      }
    }
  }
  return out;
}

ProbabilityVolume cost_to_probability(const CostVolume& vol,
                                      double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  ProbabilityVolume u(vol.num_hypotheses, vol.height, vol.width);
  for (int y = 0; y < vol.height; ++y) {
    for (int x = 0; x < vol.width; ++x) {
      double cmin = std::numeric_limits<double>::infinity();
      for (int j = 0; j < vol.num_hypotheses; ++j) {
        if (vol.valid[vol.index(j, y, x)]) {
          cmin = std::min(cmin, vol.at(j, y, x));
        }
      }
      if (!std::isfinite(cmin)) continue;  // no valid slice
      double sum = 0.0;
      for (int j = 0; j < vol.num_hypotheses; ++j) {
        const size_t k = vol.index(j, y, x);
        if (!vol.valid[k]) continue;
        const double e = std::exp(-(vol.cost[k] - cmin) / temperature);
        u.prob[k] = e;
        sum += e;
      }
      for (int j = 0; j < vol.num_hypotheses; ++j) {
        u.prob[u.index(j, y, x)] /= sum;
      }
      u.valid.at(y, x) = 1;
    }
  }
  return u;
}

PlaneParamMap soft_argmax(const ProbabilityVolume& u,
                          std::span<const PlaneParam> hypotheses) {
  if (static_cast<int>(hypotheses.size()) != u.num_hypotheses) {
    throw std::invalid_argument("hypothesis count does not match volume");
  }
  PlaneParamMap out(u.height, u.width);
  for (int y = 0; y < u.height; ++y) {
    for (int x = 0; x < u.width; ++x) {
      if (!u.valid.at(y, x)) continue;
      Vec3 acc = Vec3::Zero();
      for (int j = 0; j < u.num_hypotheses; ++j) {
        const double p = u.prob[u.index(j, y, x)];
        if (p != 0.0) acc += p * hypotheses[j].p;
      }
      out.at(y, x) = acc;
      out.valid.at(y, x) = 1;
    }
  }
  return out;
}

ConvexWeights ConvexWeights::bilinear(int h, int w, int s) {
  ConvexWeights cw(h, w, s);
  // 1D taps for sub-position k: continuous coarse offset f in (-0.5, 0.5).
  std::vector<std::array<double, 3>> taps(s);
  for (int k = 0; k < s; ++k) {
    const double f = (k + 0.5) / s - 0.5;
    taps[k] = {std::max(-f, 0.0), 1.0 - std::abs(f), std::max(f, 0.0)};
  }
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int ky = 0; ky < s; ++ky) {
        for (int kx = 0; kx < s; ++kx) {
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              cw.at(i, j, ky, kx, dy, dx) = taps[ky][dy] * taps[kx][dx];
            }
          }
        }
      }
    }
  }
  return cw;
}

void ConvexWeights::validate() const {
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      for (int ky = 0; ky < factor; ++ky) {
        for (int kx = 0; kx < factor; ++kx) {
          double sum = 0.0;
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              const double v = at(i, j, ky, kx, dy, dx);
              if (v < -1e-12) {
                throw std::invalid_argument(
                    "upsampling weights must be nonnegative");
              }
              sum += v;
            }
          }
          if (std::abs(sum - 1.0) > 1e-6) {
            throw std::invalid_argument("upsampling weights not normalized");
          }
        }
      }
    }
  }
}

PlaneParamMap convex_upsample(const PlaneParamMap& coarse,
                              const ConvexWeights& weights, int factor) {
  if (weights.height != coarse.height || weights.width != coarse.width ||
      weights.factor != factor || factor < 1) {
    throw std::invalid_argument("upsampling weights do not match map");
  }
  weights.validate();
  PlaneParamMap out(coarse.height * factor, coarse.width * factor);
  for (int v = 0; v < out.height; ++v) {
    const int i = v / factor;
    const int ky = v % factor;
    for (int u = 0; u < out.width; ++u) {
      const int j = u / factor;
      const int kx = u % factor;
      Vec3 acc = Vec3::Zero();
      bool ok = true;
      for (int dy = 0; dy < 3 && ok; ++dy) {
        const int ci = std::clamp(i + dy - 1, 0, coarse.height - 1);
        for (int dx = 0; dx < 3; ++dx) {
          const double wgt = weights.at(i, j, ky, kx, dy, dx);
          if (wgt <= 0.0) continue;
          const int cj = std::clamp(j + dx - 1, 0, coarse.width - 1);
          if (!coarse.valid.at(ci, cj)) {
            ok = false;
            break;
          }
          acc += wgt * coarse.at(ci, cj);
        }
      }
      if (ok) {
        out.at(v, u) = acc;
        out.valid.at(v, u) = 1;
      }
    }
  }
  return out;
}

SweepResult sweep(const ImageRaster& tgt, const ImageRaster& src,
                  const RelativePose& pose, const CameraIntrinsics& k_tgt,
                  const CameraIntrinsics& k_src, const HypothesisGrid& grid,
                  const SweepConfig& config) {
  return sweep(tgt, src, pose, k_tgt, k_src,
               std::span<const PlaneParam>(grid.hypotheses), config);
}

SweepResult sweep(const ImageRaster& tgt, const ImageRaster& src,
                  const RelativePose& pose, const CameraIntrinsics& k_tgt,
                  const CameraIntrinsics& k_src,
                  std::span<const PlaneParam> hypotheses,
                  const SweepConfig& config) {
  config.validate();
  if (config.upsample_factor != config.working_scale) {
    throw std::invalid_argument(
        "upsample factor must equal working scale for a full-resolution map");
  }
  CostVolume vol = build_cost_volume(tgt, src, hypotheses, pose, k_tgt, k_src,
                                     config.cost_window, config.working_scale,
                                     config.threads);
  vol = aggregate_cost(vol, config.aggregation_radius);

  SweepResult result;
  result.probability = cost_to_probability(vol, config.temperature);
  result.params_coarse = soft_argmax(result.probability, hypotheses);
  if (config.working_scale == 1) {
    result.params = result.params_coarse;
  } else {
    const ConvexWeights weights = ConvexWeights::bilinear(
        result.params_coarse.height, result.params_coarse.width,
        config.upsample_factor);
    result.params = convex_upsample(result.params_coarse, weights,
                                    config.upsample_factor);
  }
  return result;
}

}  // namespace planar
