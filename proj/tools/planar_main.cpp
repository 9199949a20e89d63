// planar: slanted plane-sweep stereo toolkit CLI.
//
// Subcommands: synth, sweep, fronto, segment, eval, pairs, bounds.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "planar/baseline.hpp"
#include "planar/geometry.hpp"
#include "planar/hypothesis.hpp"
#include "planar/instance.hpp"
#include "planar/io.hpp"
#include "planar/metrics.hpp"
#include "planar/sweep.hpp"
#include "planar/synth.hpp"

namespace fs = std::filesystem;
using namespace planar;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
};

RunConfig load_config(const GlobalOptions& g) {
  if (g.config_path.empty()) {
    return RunConfig{};
  }
  return read_config(g.config_path);
}

fs::path out_path(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

HypothesisGrid grid_from(const RunConfig& cfg) { return build_grid(cfg.grid); }

// Pools instance parameters over a parameter map and stitches the final
// planar depth map. Instances without valid support are dropped.
DepthMap pool_and_stitch(PlaneInstanceSet& instances,
                         const PlaneParamMap& params,
                         const CameraIntrinsics& k) {
  PlaneInstanceSet usable;
  for (PlaneInstance& inst : instances) {
    try {
      inst.pooled_param = soft_pool(params, inst.mask);
      usable.push_back(inst);
    } catch (const std::invalid_argument&) {
      std::cerr << "warning: dropping instance with no valid support\n";
    }
  }
  instances = usable;
  return stitch_depth(instances, params, k, PixelGrid(k));
}

int cmd_synth(const GlobalOptions& g, int count, int n_planes,
              double min_slant, double max_slant, int width, int height,
              double noise_sigma, bool textureless) {
  const RunConfig cfg = load_config(g);
  for (int i = 0; i < count; ++i) {
    SceneSpec spec = sample_scene(g.seed + static_cast<uint64_t>(i), n_planes,
                                  max_slant, min_slant, width, height);
    spec.texture.textureless = textureless;
    RenderedPair pair = render(spec, g.threads <= 0 ? 1 : g.threads);
    if (noise_sigma > 0.0) {
      pair.target = add_noise(pair.target, noise_sigma, g.seed * 31 + i * 2);
      pair.source =
          add_noise(pair.source, noise_sigma, g.seed * 31 + i * 2 + 1);
    }
    const fs::path dir = out_path(g, "scene_" + std::to_string(i));
    fs::create_directories(dir);
    write_png((dir / "target.png").string(), pair.target);
    write_png((dir / "source.png").string(), pair.source);
    write_intrinsics((dir / "intrinsics.txt").string(), spec.intrinsics);
    write_pose((dir / "pose.txt").string(), spec.pose);
    write_pfm((dir / "gt_depth.pfm").string(), pair.gt_depth);
    write_mask_png((dir / "gt_masks.png").string(), pair.gt_instance_ids);
    write_instance_params((dir / "gt_planes.txt").string(),
                          gt_instances(pair));
    write_scene_spec((dir / "scene.txt").string(), spec);
    write_config((dir / "run.cfg").string(), cfg);
    std::cout << dir.string() << "\n";
  }
  return 0;
}

int cmd_sweep(const GlobalOptions& g, const std::string& target_path,
              const std::string& source_path, const std::string& k_path,
              const std::string& pose_path, const std::string& masks_path,
              bool do_segment, bool dump_volumes) {
  const RunConfig cfg = load_config(g);
  const ImageRaster tgt = read_png(target_path);
  const ImageRaster src = read_png(source_path);
  const CameraIntrinsics k = read_intrinsics(k_path);
  const RelativePose pose = read_pose(pose_path);
  const HypothesisGrid grid = grid_from(cfg);

  const SweepResult res =
      sweep(tgt, src, pose, k, k, grid, cfg.sweep_config(g.threads));
  write_param_map(out_path(g, "param_map.vol").string(), res.params);
  if (dump_volumes) {
    write_prob_volume(out_path(g, "probability.vol").string(),
                      res.probability);
  }

  const DepthMap pixelwise = param_map_to_depth(res.params, k);
  write_pfm(out_path(g, "pixel_depth.pfm").string(), pixelwise);

  PlaneInstanceSet instances;
  if (!masks_path.empty()) {
    instances = ids_to_instances(read_mask_png(masks_path));
  } else if (do_segment) {
    instances = segment_planes(res.params, cfg.segmentation_config());
  }
  const DepthMap stitched = pool_and_stitch(instances, res.params, k);
  write_pfm(out_path(g, "stitched_depth.pfm").string(), stitched);
  write_instance_params(out_path(g, "instances.txt").string(), instances);
  write_mask_png(out_path(g, "instance_masks.png").string(),
                 instances_to_ids(instances, k.height, k.width));
  return 0;
}

int cmd_fronto(const GlobalOptions& g, const std::string& target_path,
               const std::string& source_path, const std::string& k_path,
               const std::string& pose_path, const std::string& masks_path) {
  const RunConfig cfg = load_config(g);
  const ImageRaster tgt = read_png(target_path);
  const ImageRaster src = read_png(source_path);
  const CameraIntrinsics k = read_intrinsics(k_path);
  const RelativePose pose = read_pose(pose_path);
  const DepthHypothesisSet depths = DepthHypothesisSet::uniform_inverse(
      cfg.fronto_depth_min, cfg.fronto_depth_max, cfg.fronto_depth_count);

  const DepthMap depth =
      fronto_sweep(tgt, src, pose, k, k, depths, cfg.sweep_config(g.threads));
  write_pfm(out_path(g, "fronto_depth.pfm").string(), depth);

  if (!masks_path.empty()) {
    // Depth-sweep ablation pipeline: least-squares plane fits per mask.
    PlaneInstanceSet instances = ids_to_instances(read_mask_png(masks_path));
    PlaneParamMap params(depth.height(), depth.width());
    for (int y = 0; y < depth.height(); ++y) {
      for (int x = 0; x < depth.width(); ++x) {
        if (!depth.valid.at(y, x)) continue;
        params.at(y, x) = Vec3(0, 0, -1.0 / depth.values.at(y, x));
        params.valid.at(y, x) = 1;
      }
    }
    PlaneInstanceSet fitted;
    for (PlaneInstance& inst : instances) {
      try {
        inst.pooled_param = fit_plane_lsq(depth, inst.mask, k, PixelGrid(k));
        fitted.push_back(inst);
      } catch (const std::invalid_argument&) {
        std::cerr << "warning: dropping degenerate plane fit\n";
      }
    }
    const DepthMap stitched = stitch_depth(fitted, params, k, PixelGrid(k));
    write_pfm(out_path(g, "fronto_planar_depth.pfm").string(), stitched);
    write_instance_params(out_path(g, "fronto_instances.txt").string(),
                          fitted);
  }
  return 0;
}

int cmd_segment(const GlobalOptions& g, const std::string& params_path) {
  const RunConfig cfg = load_config(g);
  const PlaneParamMap params = read_param_map(params_path);
  PlaneInstanceSet instances =
      segment_planes(params, cfg.segmentation_config());
  for (PlaneInstance& inst : instances) {
    inst.pooled_param = soft_pool(params, inst.mask);
  }
  write_mask_png(out_path(g, "instance_masks.png").string(),
                 instances_to_ids(instances, params.height, params.width));
  write_instance_params(out_path(g, "instances.txt").string(), instances);
  std::cout << instances.size() << " instances\n";
  return 0;
}

int cmd_eval(const GlobalOptions& g, const std::string& pred_depth_path,
             const std::string& gt_depth_path, const std::string& pred_masks,
             const std::string& pred_params, const std::string& gt_masks,
             const std::string& gt_params, const std::string& k_path) {
  const DepthMap pred = read_pfm(pred_depth_path);
  const DepthMap gt = read_pfm(gt_depth_path);
  const DepthMetrics dm = depth_metrics(pred, gt);

  MetricReport report;
  report.add("abs_rel", dm.abs_rel);
  report.add("sq_rel", dm.sq_rel);
  report.add("rmse", dm.rmse);
  report.add("rmse_log", dm.rmse_log);
  report.add("delta1", dm.delta1);
  report.add("delta2", dm.delta2);
  report.add("delta3", dm.delta3);

  if (!pred_masks.empty() && !gt_masks.empty()) {
    if (k_path.empty()) {
      throw std::runtime_error("detection metrics need --intrinsics");
    }
    const CameraIntrinsics k = read_intrinsics(k_path);
    const PlaneInstanceSet preds_set = read_instances(pred_masks, pred_params);
    const PlaneInstanceSet gts =
        gt_params.empty() ? ids_to_instances(read_mask_png(gt_masks))
                          : read_instances(gt_masks, gt_params);
    std::vector<DetectionPrediction> preds;
    for (const PlaneInstance& inst : preds_set) {
      if (!inst.pooled_param.has_value()) continue;
      DetectionPrediction p;
      p.instance = inst;
      p.depth = instance_depth(*inst.pooled_param, inst.mask, k, PixelGrid(k));
      preds.push_back(std::move(p));
    }
    const DetectionMetrics det = detection_metrics(preds, gts, gt);
    report.add("ap_0.2", det.ap_per_threshold[0]);
    report.add("ap_0.4", det.ap_per_threshold[1]);
    report.add("ap_0.6", det.ap_per_threshold[2]);
    report.add("ap_0.9", det.ap_per_threshold[3]);
    report.add("ap", det.ap);
    if (det.map.has_value()) {
      report.add("map", *det.map);
    }
  }

  write_metric_report(out_path(g, "metrics.txt").string(),
                      out_path(g, "metrics.json").string(), report);
  for (const auto& [key, value] : report.values) {
    std::cout << key << " " << value << "\n";
  }
  return 0;
}

int cmd_pairs(const GlobalOptions& g, const std::string& trajectory_path,
              std::optional<double> min_t, std::optional<double> max_t) {
  const RunConfig cfg = load_config(g);
  const auto frames = read_trajectory(trajectory_path);
  const auto pairs =
      select_pairs(frames, min_t.value_or(cfg.pair_min_translation),
                   max_t.value_or(cfg.pair_max_translation));
  std::ofstream out(out_path(g, "pairs.txt"));
  for (const StereoPairRecord& rec : pairs) {
    const std::string line =
        std::to_string(rec.target_index) + " " +
        std::to_string(rec.source_index) + " " + rec.target_path + " " +
        rec.source_path;
    out << line << "\n";
    std::cout << line << " t=" << rec.relative.translation.norm() << "\n";
  }
  std::cout << pairs.size() << " pairs\n";
  return 0;
}

int cmd_bounds(const std::string& samples_path,
               double coverage) {
  std::ifstream in(samples_path);
  if (!in) {
    throw std::runtime_error(samples_path + ": cannot open");
  }
  std::vector<PlaneParam> samples;
  double x, y, z;
  while (in >> x >> y >> z) {
    samples.emplace_back(x, y, z);
  }
  const auto bounds = select_bounds(samples, coverage);
  const char axes[3] = {'x', 'y', 'z'};
  for (int a = 0; a < 3; ++a) {
    std::cout << "grid_" << axes[a] << "_lo = " << bounds[a].lo << "\n";
    std::cout << "grid_" << axes[a] << "_hi = " << bounds[a].hi << "\n";
  }
  const auto cov = grid_coverage(build_grid(bounds), samples);
  std::cout << "# coverage " << cov[0] << " " << cov[1] << " " << cov[2]
            << " on " << samples.size() << " samples\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slanted plane-sweep stereo toolkit"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "run configuration file");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--seed", g.seed, "base RNG seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");

  auto* synth = app.add_subcommand("synth", "render synthetic stereo scenes");
  int synth_count = 1, synth_planes = 3, synth_w = 128, synth_h = 96;
  double synth_min_slant = 0.0, synth_max_slant = 40.0, synth_noise = 0.0;
  bool synth_flat = false;
  synth->add_option("--scenes", synth_count, "number of scenes");
  synth->add_option("--planes", synth_planes, "planes per scene");
  synth->add_option("--min-slant", synth_min_slant, "min normal slant (deg)");
  synth->add_option("--max-slant", synth_max_slant, "max normal slant (deg)");
  synth->add_option("--width", synth_w, "image width");
  synth->add_option("--height", synth_h, "image height");
  synth->add_option("--noise", synth_noise, "intensity noise sigma");
  synth->add_flag("--textureless", synth_flat, "constant texture");

  auto* swp = app.add_subcommand("sweep", "slanted plane-sweep pipeline");
  std::string s_target, s_source, s_k, s_pose, s_masks;
  bool s_segment = false, s_dump = false;
  swp->add_option("--target", s_target, "target image PNG")->required();
  swp->add_option("--source", s_source, "source image PNG")->required();
  swp->add_option("--intrinsics", s_k, "intrinsics text file")->required();
  swp->add_option("--pose", s_pose, "pose text file")->required();
  swp->add_option("--masks", s_masks, "instance mask PNG for pooling");
  swp->add_flag("--segment", s_segment, "region-grow instances");
  swp->add_flag("--dump-volumes", s_dump, "write the probability volume");

  auto* fro = app.add_subcommand("fronto", "fronto-parallel depth baseline");
  std::string f_target, f_source, f_k, f_pose, f_masks;
  fro->add_option("--target", f_target, "target image PNG")->required();
  fro->add_option("--source", f_source, "source image PNG")->required();
  fro->add_option("--intrinsics", f_k, "intrinsics text file")->required();
  fro->add_option("--pose", f_pose, "pose text file")->required();
  fro->add_option("--masks", f_masks, "instance masks for plane fitting");

  auto* seg = app.add_subcommand("segment", "region-grow plane instances");
  std::string seg_params;
  seg->add_option("--params", seg_params, "plane parameter map (.vol)")
      ->required();

  auto* ev = app.add_subcommand("eval", "depth and detection metrics");
  std::string e_pred, e_gt, e_pmasks, e_pparams, e_gmasks, e_gparams, e_k;
  ev->add_option("--pred-depth", e_pred, "predicted depth PFM")->required();
  ev->add_option("--gt-depth", e_gt, "ground-truth depth PFM")->required();
  ev->add_option("--pred-masks", e_pmasks, "predicted instance masks PNG");
  ev->add_option("--pred-params", e_pparams, "predicted instance text");
  ev->add_option("--gt-masks", e_gmasks, "ground-truth instance masks PNG");
  ev->add_option("--gt-params", e_gparams, "ground-truth instance text");
  ev->add_option("--intrinsics", e_k, "intrinsics text file");

  auto* pr = app.add_subcommand("pairs", "stereo pair selection");
  std::string p_traj;
  double p_min = -1.0, p_max = -1.0;
  pr->add_option("--trajectory", p_traj, "camera-to-world trajectory file")
      ->required();
  pr->add_option("--min-t", p_min, "min relative translation (m)");
  pr->add_option("--max-t", p_max, "max relative translation (m)");

  auto* bd = app.add_subcommand("bounds", "data-driven hypothesis bounds");
  std::string b_samples;
  double b_coverage = 0.95;
  bd->add_option("--samples", b_samples, "plane parameter sample file")
      ->required();
  bd->add_option("--coverage", b_coverage, "required coverage fraction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      return cmd_synth(g, synth_count, synth_planes, synth_min_slant,
                       synth_max_slant, synth_w, synth_h, synth_noise,
                       synth_flat);
    }
    if (swp->parsed()) {
      return cmd_sweep(g, s_target, s_source, s_k, s_pose, s_masks, s_segment,
                       s_dump);
    }
    if (fro->parsed()) {
      return cmd_fronto(g, f_target, f_source, f_k, f_pose, f_masks);
    }
    if (seg->parsed()) {
      return cmd_segment(g, seg_params);
    }
    if (ev->parsed()) {
      return cmd_eval(g, e_pred, e_gt, e_pmasks, e_pparams, e_gmasks,
                      e_gparams, e_k);
    }
    if (pr->parsed()) {
      return cmd_pairs(
          g, p_traj, p_min >= 0 ? std::optional<double>(p_min) : std::nullopt,
          p_max >= 0 ? std::optional<double>(p_max) : std::nullopt);
    }
    if (bd->parsed()) {
      return cmd_bounds(b_samples, b_coverage);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
