#pragma once

#include <array>
#include <span>
#include <vector>

#include "planar/types.hpp"

namespace planar {

// Inclusive sampling range for one axis of p = n^T / e.
struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;

  double spacing() const { return (hi - lo) / (count - 1); }
  std::vector<double> samples() const;
  void validate() const;
};

// The swept set of slanted plane hypotheses: a uniform inclusive grid over
// the three axes of p, ordered z-fastest lexicographic.
struct HypothesisGrid {
  std::array<AxisRange, 3> ranges;
  std::vector<PlaneParam> hypotheses;

  int size() const { return static_cast<int>(hypotheses.size()); }

  // Unweighted mean of all hypotheses: ((lo+hi)/2 per axis).
  Vec3 centroid() const;
};

// Uniform inclusive grid over the given ranges. Errors on count < 2 or
// lo >= hi.
HypothesisGrid build_grid(const std::array<AxisRange, 3>& ranges);

// 8 samples per axis over (-2, 2), (-2, 2), (-2, 0.5): 512 hypotheses.
HypothesisGrid default_grid();
std::array<AxisRange, 3> default_ranges();

// Per-axis bounds as symmetric sample quantiles [q_(1-c)/2, q_(1+c)/2] so
// each axis covers at least `coverage` of the samples. Degenerate axes are
// widened to (v - 1e-3, v + 1e-3). The returned counts default to 8.
std::array<AxisRange, 3> select_bounds(std::span<const PlaneParam> samples,
                                       double coverage);

// Fraction of samples whose axis value lies within [lo, hi], per axis.
std::array<double, 3> grid_coverage(const HypothesisGrid& grid,
                                    std::span<const PlaneParam> samples);

}  // namespace planar
