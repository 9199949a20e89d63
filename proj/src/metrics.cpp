#include "planar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace planar {

namespace {

bool foreground(const SoftMask& m, int y, int x) {
  return m.sigma.at(y, x) > 0.5;
}

double mask_iou(const SoftMask& a, const SoftMask& b) {
  size_t inter = 0, uni = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const bool fa = foreground(a, y, x);
      const bool fb = foreground(b, y, x);
      inter += fa && fb;
      uni += fa || fb;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Mean |d - d*| over the mask intersection; pixels lacking a valid depth on
// either side are excluded. Returns nullopt when nothing can be compared.
std::optional<double> mean_depth_error(const DetectionPrediction& pred,
                                       const SoftMask& gt_mask,
                                       const DepthMap& gt_depth) {
  double sum = 0.0;
  size_t count = 0;
  for (int y = 0; y < gt_mask.height(); ++y) {
    for (int x = 0; x < gt_mask.width(); ++x) {
      if (!foreground(pred.instance.mask, y, x) || !foreground(gt_mask, y, x)) {
        continue;
      }
      if (!pred.depth.valid.at(y, x) || !gt_depth.valid.at(y, x)) continue;
      sum += std::abs(pred.depth.values.at(y, x) - gt_depth.values.at(y, x));
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

// Score-ordered greedy matching; returns per-rank true-positive flags.
std::vector<char> match_predictions(const std::vector<DetectionPrediction>& preds,
                                    const PlaneInstanceSet& gts,
                                    const DepthMap& gt_depth,
                                    std::optional<double> depth_threshold,
                                    bool require_label) {
  std::vector<int> order(preds.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return preds[a].instance.score > preds[b].instance.score;
  });

  std::vector<char> gt_taken(gts.size(), 0);
  std::vector<char> tp(preds.size(), 0);
  for (size_t rank = 0; rank < order.size(); ++rank) {
    const DetectionPrediction& pred = preds[order[rank]];
    int best_gt = -1;
    double best_iou = 0.5;  // strict IoU > 0.5 gate
    for (size_t g = 0; g < gts.size(); ++g) {
      if (gt_taken[g]) continue;
      if (require_label &&
          (!pred.instance.semantic_label.has_value() ||
           !gts[g].semantic_label.has_value() ||
           *pred.instance.semantic_label != *gts[g].semantic_label)) {
        continue;
      }
      const double iou = mask_iou(pred.instance.mask, gts[g].mask);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt < 0) continue;
    if (depth_threshold.has_value()) {
      const std::optional<double> err =
          mean_depth_error(pred, gts[best_gt].mask, gt_depth);
      if (!err.has_value() || !(*err < *depth_threshold)) continue;
    }
    gt_taken[best_gt] = 1;
    tp[rank] = 1;
  }
  return tp;
}

// Area under the precision-recall curve with all-point interpolation.
double pr_area(const std::vector<char>& tp_by_rank, size_t num_gt) {
  std::vector<double> precision, recall;
  size_t tp = 0;
  for (size_t i = 0; i < tp_by_rank.size(); ++i) {
    tp += tp_by_rank[i] != 0;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < precision.size(); ++i) {
    if (recall[i] <= prev_recall) continue;
    double pmax = 0.0;
    for (size_t j = i; j < precision.size(); ++j) {
      pmax = std::max(pmax, precision[j]);
    }
    ap += (recall[i] - prev_recall) * pmax;
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw std::invalid_argument("depth_metrics: dimension mismatch");
  }
  double abs_rel = 0.0, sq_rel = 0.0, sq = 0.0, sq_log = 0.0;
  size_t d1 = 0, d2 = 0, d3 = 0, count = 0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred.valid.at(y, x) || !gt.valid.at(y, x)) continue;
      const double d = pred.values.at(y, x);
      const double g = gt.values.at(y, x);
      const double diff = d - g;
      abs_rel += std::abs(diff) / g;
      sq_rel += diff * diff / g;
      sq += diff * diff;
      const double dlog = std::log(d) - std::log(g);
      sq_log += dlog * dlog;
      const double ratio = std::max(d / g, g / d);
      d1 += ratio < 1.25;
      d2 += ratio < 1.25 * 1.25;
      d3 += ratio < 1.25 * 1.25 * 1.25;
      ++count;
    }
  }
  if (count == 0) {
    throw std::invalid_argument("no jointly-valid pixel");
  }
  const double n = static_cast<double>(count);
  DepthMetrics m;
  m.abs_rel = abs_rel / n;
  m.sq_rel = sq_rel / n;
  m.rmse = std::sqrt(sq / n);
  m.rmse_log = std::sqrt(sq_log / n);
  m.delta1 = static_cast<double>(d1) / n;
  m.delta2 = static_cast<double>(d2) / n;
  m.delta3 = static_cast<double>(d3) / n;
  return m;
}

double detection_ap(const std::vector<DetectionPrediction>& preds,
                    const PlaneInstanceSet& gts, const DepthMap& gt_depth,
                    std::optional<double> depth_threshold) {
  if (gts.empty()) {
    throw std::invalid_argument("undefined AP");
  }
  const std::vector<char> tp =
      match_predictions(preds, gts, gt_depth, depth_threshold, false);
  return pr_area(tp, gts.size());
}

double detection_map(const std::vector<DetectionPrediction>& preds,
                     const PlaneInstanceSet& gts, const DepthMap& gt_depth,
                     std::optional<double> depth_threshold) {
  std::set<int> classes;
  for (const PlaneInstance& gt : gts) {
    if (gt.semantic_label.has_value()) classes.insert(*gt.semantic_label);
  }
  if (classes.empty()) {
    throw std::invalid_argument("no labeled ground truth");
  }
  double sum = 0.0;
  for (int cls : classes) {
    std::vector<DetectionPrediction> cls_preds;
    PlaneInstanceSet cls_gts;
    for (const DetectionPrediction& p : preds) {
      if (p.instance.semantic_label.has_value() &&
          *p.instance.semantic_label == cls) {
        cls_preds.push_back(p);
      }
    }
    for (const PlaneInstance& g : gts) {
      if (g.semantic_label.has_value() && *g.semantic_label == cls) {
        cls_gts.push_back(g);
      }
    }
    const std::vector<char> tp =
        match_predictions(cls_preds, cls_gts, gt_depth, depth_threshold, true);
    sum += pr_area(tp, cls_gts.size());
  }
  return sum / static_cast<double>(classes.size());
}

DetectionMetrics detection_metrics(const std::vector<DetectionPrediction>& preds,
                                   const PlaneInstanceSet& gts,
                                   const DepthMap& gt_depth) {
  DetectionMetrics m;
  for (size_t i = 0; i < DetectionMetrics::kThresholds.size(); ++i) {
    m.ap_per_threshold[i] =
        detection_ap(preds, gts, gt_depth, DetectionMetrics::kThresholds[i]);
  }
  m.ap = detection_ap(preds, gts, gt_depth, std::nullopt);
  const bool labeled = std::any_of(
      gts.begin(), gts.end(),
      [](const PlaneInstance& g) { return g.semantic_label.has_value(); });
  if (labeled) {
    m.map = detection_map(preds, gts, gt_depth, std::nullopt);
  }
  return m;
}

}  // namespace planar
