#include "planar/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace planar {

std::vector<double> AxisRange::samples() const {
  validate();
  std::vector<double> out(count);
  const double step = spacing();
  for (int i = 0; i < count; ++i) {
    out[i] = lo + i * step;
  }
  out.back() = hi;  // endpoint exact
  return out;
}

void AxisRange::validate() const {
  if (count < 2) {
    throw std::invalid_argument("axis sample count must be >= 2");
  }
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("axis range requires lo < hi");
  }
}

Vec3 HypothesisGrid::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const PlaneParam& p : hypotheses) {
    sum += p.p;
  }
  return sum / static_cast<double>(hypotheses.size());
}

HypothesisGrid build_grid(const std::array<AxisRange, 3>& ranges) {
  HypothesisGrid grid;
  grid.ranges = ranges;
  const std::vector<double> xs = ranges[0].samples();
  const std::vector<double> ys = ranges[1].samples();
  const std::vector<double> zs = ranges[2].samples();
  grid.hypotheses.reserve(xs.size() * ys.size() * zs.size());
  for (double x : xs) {
    for (double y : ys) {
      for (double z : zs) {
        grid.hypotheses.emplace_back(x, y, z);
      }
    }
  }
  return grid;
}

std::array<AxisRange, 3> default_ranges() {
  return {AxisRange{-2.0, 2.0, 8}, AxisRange{-2.0, 2.0, 8},
          AxisRange{-2.0, 0.5, 8}};
}

HypothesisGrid default_grid() { return build_grid(default_ranges()); }

std::array<AxisRange, 3> select_bounds(std::span<const PlaneParam> samples,
                                       double coverage) {
  if (samples.empty()) {
    throw std::invalid_argument("empty sample set");
  }
  if (samples.size() < 2) {
    throw std::invalid_argument("need at least 2 samples");
  }
  if (!(coverage > 0.0 && coverage < 1.0)) {
    throw std::invalid_argument("coverage must lie in (0, 1)");
  }
  const double alpha = (1.0 - coverage) / 2.0;
  const size_t n = samples.size();
  std::array<AxisRange, 3> out;
  std::vector<double> axis(n);
  for (int a = 0; a < 3; ++a) {
    for (size_t i = 0; i < n; ++i) {
      axis[i] = samples[i].p[a];
    }
    std::sort(axis.begin(), axis.end());
    // Outward-rounded order statistics: the closed interval is guaranteed
    // to contain at least coverage * n of the samples.
    const size_t lo_idx =
        static_cast<size_t>(std::floor(alpha * static_cast<double>(n - 1)));
    const size_t hi_idx = static_cast<size_t>(
        std::ceil((1.0 - alpha) * static_cast<double>(n - 1)));
    double lo = axis[lo_idx];
    double hi = axis[hi_idx];
    if (!(hi - lo > 0.0)) {
      const double eps = 1e-3;
      lo -= eps;
      hi += eps;
    }
    out[a] = AxisRange{lo, hi, 8};
  }
  return out;
}

std::array<double, 3> grid_coverage(const HypothesisGrid& grid,
                                    std::span<const PlaneParam> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("empty sample set");
  }
  std::array<double, 3> frac = {0.0, 0.0, 0.0};
  for (int a = 0; a < 3; ++a) {
    size_t inside = 0;
    for (const PlaneParam& s : samples) {
      if (s.p[a] >= grid.ranges[a].lo && s.p[a] <= grid.ranges[a].hi) {
        ++inside;
      }
    }
    frac[a] = static_cast<double>(inside) / static_cast<double>(samples.size());
  }
  return frac;
}

}  // namespace planar
