#pragma once

#include <array>
#include <optional>
#include <vector>

#include "planar/types.hpp"

namespace planar {

// Standard depth-error metrics over jointly-valid pixels.
struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt);

// A detection to score: instance (mask, score, optional label) plus its
// reconstructed planar depth over the foreground.
struct DetectionPrediction {
  PlaneInstance instance;
  DepthMap depth;
};

// Average precision with an IoU > 0.5 mask gate and, when a threshold is
// given, a mean-absolute depth-error test over the mask intersection.
// Predictions are matched greedily in descending score order (ties keep
// input order) to the unmatched ground truth of highest IoU. The area under
// the precision-recall curve uses all-point interpolation. Throws
// "undefined AP" on an empty ground-truth set.
double detection_ap(const std::vector<DetectionPrediction>& preds,
                    const PlaneInstanceSet& gts, const DepthMap& gt_depth,
                    std::optional<double> depth_threshold);

// Per-semantic-class AP (matches additionally require label equality),
// averaged over the classes present in the ground truth. Throws when no
// labeled ground truth exists.
double detection_map(const std::vector<DetectionPrediction>& preds,
                     const PlaneInstanceSet& gts, const DepthMap& gt_depth,
                     std::optional<double> depth_threshold);

struct DetectionMetrics {
  static constexpr std::array<double, 4> kThresholds = {0.2, 0.4, 0.6, 0.9};
  std::array<double, 4> ap_per_threshold = {0.0, 0.0, 0.0, 0.0};
  double ap = 0.0;                // no depth test
  std::optional<double> map;      // set when labels are present
};

DetectionMetrics detection_metrics(const std::vector<DetectionPrediction>& preds,
                                   const PlaneInstanceSet& gts,
                                   const DepthMap& gt_depth);

}  // namespace planar
