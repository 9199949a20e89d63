#include "planar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "planar/parallel.hpp"
#include "planar/rng.hpp"

namespace planar {

namespace {

constexpr double kRayEpsilon = 1e-12;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double lattice_value(int64_t x, int64_t y, uint64_t seed) {
  return static_cast<double>(hash_coords(x, y, seed) >> 11) * 0x1.0p-53;
}

double value_noise(double u, double v, uint64_t seed) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int64_t iu = static_cast<int64_t>(fu);
  const int64_t iv = static_cast<int64_t>(fv);
  const double tu = smoothstep(u - fu);
  const double tv = smoothstep(v - fv);
  const double a = lattice_value(iu, iv, seed);
  const double b = lattice_value(iu + 1, iv, seed);
  const double c = lattice_value(iu, iv + 1, seed);
  const double d = lattice_value(iu + 1, iv + 1, seed);
  return (1.0 - tv) * ((1.0 - tu) * a + tu * b) +
         tv * ((1.0 - tu) * c + tu * d);
}

double texture_intensity(const TextureParams& tex, double u, double v,
                         uint64_t seed) {
  if (tex.textureless) return 0.5;
  const double inv = 1.0 / tex.cell_size;
  const double n1 = value_noise(u * inv, v * inv, seed);
  const double n2 =
      value_noise(u * inv * 2.0 + 31.7, v * inv * 2.0 + 17.3, seed ^ 0x9e3779b9ULL);
  const double n = 0.65 * n1 + 0.35 * n2;
  return std::clamp(0.5 + (n - 0.5) * tex.contrast, 0.0, 1.0);
}

// Convex polygon containment, orientation-agnostic.
bool inside_polygon(const std::vector<Vec2>& poly, const Vec2& q) {
  double sign = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double cross =
        (b.x() - a.x()) * (q.y() - a.y()) - (b.y() - a.y()) * (q.x() - a.x());
    if (std::abs(cross) < 1e-12) continue;
    if (sign == 0.0) {
      sign = cross;
    } else if (sign * cross < 0.0) {
      return false;
    }
  }
  return true;
}

struct ViewPlane {
  Vec3 p;          // plane parameter in the view frame
  bool usable = false;
};

ViewPlane to_view(const PlaneParam& target_param, const RelativePose& pose,
                  bool source_view) {
  ViewPlane out;
  if (!source_view) {
    out.p = target_param.p;
    out.usable = true;
    return out;
  }
  Vec3 n;
  double e;
  target_param.to_normal_offset(&n, &e);
  const Vec3 n_src = pose.rotation * n;
  const double e_src = e - n_src.dot(pose.translation);
  if (std::abs(e_src) < 1e-9) {
    return out;  // plane through the source camera center
  }
  out.p = n_src / e_src;
  out.usable = true;
  return out;
}

}  // namespace

PlaneFrame PlaneFrame::from_param(const PlaneParam& param) {
  param.validate();
  PlaneFrame f;
  Vec3 n;
  double e;
  param.to_normal_offset(&n, &e);
  f.normal = n;
  f.origin = -e * n;  // closest point of the plane to the camera center
  Vec3 a = n.cross(Vec3::UnitZ());
  if (a.norm() < 1e-6) {
    a = n.cross(Vec3::UnitX());
  }
  f.axis_u = a.normalized();
  f.axis_v = n.cross(f.axis_u);
  return f;
}

Vec2 PlaneFrame::project(const Vec3& point) const {
  const Vec3 d = point - origin;
  return Vec2(axis_u.dot(d), axis_v.dot(d));
}

void SceneSpec::validate() const {
  if (planes.empty()) {
    throw std::invalid_argument("scene spec has zero planes");
  }
  intrinsics.validate();
  pose.validate();
  if (!(background_depth > 0.0)) {
    throw std::invalid_argument("background depth must be positive");
  }
  for (const ScenePlane& pl : planes) {
    pl.param.validate();
    if (pl.polygon.size() < 3) {
      throw std::invalid_argument("plane polygon needs at least 3 vertices");
    }
    double area = 0.0;
    for (size_t i = 0; i < pl.polygon.size(); ++i) {
      const Vec2& a = pl.polygon[i];
      const Vec2& b = pl.polygon[(i + 1) % pl.polygon.size()];
      area += a.x() * b.y() - b.x() * a.y();
    }
    if (std::abs(area) < 1e-12) {
      throw std::invalid_argument("degenerate plane polygon");
    }
  }
}

RenderedPair render(const SceneSpec& spec, int threads) {
  spec.validate();
  const int w = spec.intrinsics.width;
  const int h = spec.intrinsics.height;
  const PlaneParam background = PlaneParam::fronto(spec.background_depth);

  RenderedPair pair;
  pair.target = ImageRaster(h, w, 1, 0.5);
  pair.source = ImageRaster(h, w, 1, 0.5);
  pair.gt_depth = DepthMap(h, w);
  pair.gt_instance_ids = Raster<uint16_t>(h, w, 0);
  pair.gt_params.reserve(spec.planes.size());
  for (const ScenePlane& pl : spec.planes) {
    pair.gt_params.push_back(pl.param);
  }

  std::vector<PlaneFrame> frames;
  frames.reserve(spec.planes.size());
  for (const ScenePlane& pl : spec.planes) {
    frames.push_back(PlaneFrame::from_param(pl.param));
  }

  for (int view = 0; view < 2; ++view) {
    const bool source_view = view == 1;
    ImageRaster& img = source_view ? pair.source : pair.target;

    std::vector<ViewPlane> view_planes(spec.planes.size());
    for (size_t i = 0; i < spec.planes.size(); ++i) {
      view_planes[i] = to_view(spec.planes[i].param, spec.pose, source_view);
    }
    const ViewPlane view_bg = to_view(background, spec.pose, source_view);
    const Mat3 rot_t = spec.pose.rotation.transpose();

    parallel_for(0, h, threads, [&](int y) {
      for (int x = 0; x < w; ++x) {
        const Vec3 ray = spec.intrinsics.ray(x, y);
        double best_depth = std::numeric_limits<double>::infinity();
        int best_id = -1;  // -1 none, 0 background, i+1 plane i
        Vec2 best_uv = Vec2::Zero();

        if (view_bg.usable) {
          const double s = view_bg.p.dot(ray);
          if (s < -kRayEpsilon) {
            best_depth = -1.0 / s;
            best_id = 0;
          }
        }
        for (size_t i = 0; i < spec.planes.size(); ++i) {
          if (!view_planes[i].usable) continue;
          const double s = view_planes[i].p.dot(ray);
          if (s >= -kRayEpsilon) continue;
          const double d = -1.0 / s;
          if (d >= best_depth) continue;
          Vec3 point = d * ray;
          if (source_view) {
            point = rot_t * (point - spec.pose.translation);
          }
          const Vec2 uv = frames[i].project(point);
          if (!inside_polygon(spec.planes[i].polygon, uv)) continue;
          best_depth = d;
          best_id = static_cast<int>(i) + 1;
          best_uv = uv;
        }

        double intensity = 0.5;
        if (best_id > 0) {
          intensity =
              texture_intensity(spec.texture, best_uv.x(), best_uv.y(),
                                spec.planes[best_id - 1].texture_seed);
        }
        img.at(y, x) = intensity;

        if (!source_view) {
          if (best_id >= 0) {
            pair.gt_depth.values.at(y, x) = best_depth;
            pair.gt_depth.valid.at(y, x) = 1;
            pair.gt_instance_ids.at(y, x) = static_cast<uint16_t>(best_id);
          }
        }
      }
    });
  }
  return pair;
}

SceneSpec sample_scene(uint64_t seed, int n_planes, double max_slant_deg,
                       double min_slant_deg, int width, int height) {
  if (n_planes < 1) {
    throw std::invalid_argument("need at least one plane");
  }
  Rng master(seed ^ 0x51CE5CE5E5ULL);
  CameraIntrinsics k;
  k.fx = k.fy = 0.75 * width;
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  k.width = width;
  k.height = height;

  const std::array<double, 3> hull_lo = {-2.0, -2.0, -2.0};
  const std::array<double, 3> hull_hi = {2.0, 2.0, 0.5};

  SceneSpec best_spec;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Rng rng = master.fork();
    SceneSpec spec;
    spec.intrinsics = k;
    spec.background_depth = 20.0;
    spec.background_texture_seed = rng.next();

    // Small rotation plus a mostly-lateral baseline in [0.05, 0.15] m.
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    const double angle = rng.uniform(0.2, 1.5) * std::numbers::pi / 180.0;
    spec.pose.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    Vec3 dir(rng.normal(), rng.normal(), 0.4 * rng.normal());
    dir.normalize();
    spec.pose.translation = dir * rng.uniform(0.05, 0.15);

    bool ok = true;
    const double band_w = static_cast<double>(width) / n_planes;
    for (int p = 0; p < n_planes && ok; ++p) {
      const double margin = 0.15 * band_w + 6.0;
      const double u0 = p * band_w - margin;
      const double u1 = (p + 1) * band_w + margin;
      const double v0 = -0.15 * height - 6.0;
      const double v1 = 1.15 * height + 6.0;

      bool placed = false;
      for (int tries = 0; tries < 60 && !placed; ++tries) {
        const double z = rng.uniform(1.6, 2.8);
        const double slant =
            rng.uniform(min_slant_deg, max_slant_deg) * std::numbers::pi / 180.0;
        const double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec3 normal(std::sin(slant) * std::cos(azimuth),
                          std::sin(slant) * std::sin(azimuth),
                          std::cos(slant));
        const Vec3 center = z * k.ray(0.5 * (u0 + u1), k.cy);
        const double e = -normal.dot(center);
        if (e > -0.3) continue;
        const Vec3 pvec = normal / e;

        bool in_hull = true;
        for (int a = 0; a < 3; ++a) {
          const double m = 0.03 * (hull_hi[a] - hull_lo[a]);
          if (!(pvec[a] > hull_lo[a] + m && pvec[a] < hull_hi[a] - m)) {
            in_hull = false;
          }
        }
        if (!in_hull) continue;

        const PlaneParam param{pvec};
        const PlaneFrame frame = PlaneFrame::from_param(param);
        const Vec2 corners_px[4] = {{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}};
        std::vector<Vec2> poly;
        poly.reserve(4);
        bool corners_ok = true;
        for (const Vec2& c : corners_px) {
          const Vec3 ray = k.ray(c.x(), c.y());
          const double s = pvec.dot(ray);
          if (s >= -1e-9) {
            corners_ok = false;
            break;
          }
          poly.push_back(frame.project((-1.0 / s) * ray));
        }
        if (!corners_ok) continue;

        ScenePlane plane;
        plane.param = param;
        plane.polygon = std::move(poly);
        plane.texture_seed = rng.next();
        spec.planes.push_back(std::move(plane));
        placed = true;
      }
      ok = placed;
    }
    if (!ok) continue;

    best_spec = spec;

    // Reject scenes with (near-)fully occluded instances.
    const RenderedPair probe = render(spec, 1);
    std::vector<size_t> visible(n_planes + 1, 0);
    for (uint16_t id : probe.gt_instance_ids.data) {
      ++visible[id];
    }
    const size_t need = static_cast<size_t>(0.02 * width * height);
    bool all_visible = true;
    for (int p = 1; p <= n_planes; ++p) {
      if (visible[p] < need) all_visible = false;
    }
    if (all_visible) return spec;
  }
  return best_spec;
}

PlaneParamMap gt_param_map(const RenderedPair& pair) {
  const int h = pair.gt_instance_ids.height;
  const int w = pair.gt_instance_ids.width;
  PlaneParamMap map(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const uint16_t id = pair.gt_instance_ids.at(y, x);
      if (id == 0) {
        if (!pair.gt_depth.valid.at(y, x)) continue;
        map.at(y, x) = Vec3(0.0, 0.0, -1.0 / pair.gt_depth.values.at(y, x));
      } else {
        map.at(y, x) = pair.gt_params[id - 1].p;
      }
      map.valid.at(y, x) = 1;
    }
  }
  return map;
}

PlaneInstanceSet gt_instances(const RenderedPair& pair, double score) {
  const int h = pair.gt_instance_ids.height;
  const int w = pair.gt_instance_ids.width;
  PlaneInstanceSet out;
  for (size_t i = 0; i < pair.gt_params.size(); ++i) {
    PlaneInstance inst;
    inst.mask = SoftMask(h, w, 0.0);
    size_t count = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (pair.gt_instance_ids.at(y, x) == i + 1) {
          inst.mask.sigma.at(y, x) = 1.0;
          ++count;
        }
      }
    }
    if (count == 0) continue;
    inst.score = score;
    inst.pooled_param = pair.gt_params[i];
    out.push_back(std::move(inst));
  }
  return out;
}

ImageRaster add_noise(const ImageRaster& img, double sigma, uint64_t seed) {
  Rng rng(seed);
  ImageRaster out = img;
  for (double& v : out.data) {
    v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
  }
  return out;
}

}  // namespace planar
