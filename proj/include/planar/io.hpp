#pragma once

#include <span>
#include <string>
#include <vector>

#include "planar/hypothesis.hpp"
#include "planar/instance.hpp"
#include "planar/sweep.hpp"
#include "planar/synth.hpp"
#include "planar/types.hpp"

namespace planar {

// --- depth maps: PFM, grayscale float32, invalid pixels stored as 0 ------
void write_pfm(const std::string& path, const DepthMap& depth);
DepthMap read_pfm(const std::string& path);

// --- images: 8-bit PNG (gray or RGB), [0, 1] internally ------------------
void write_png(const std::string& path, const ImageRaster& img);
ImageRaster read_png(const std::string& path);

// --- instance-id masks: 16-bit grayscale PNG, 0 = background -------------
void write_mask_png(const std::string& path, const Raster<uint16_t>& ids);
Raster<uint16_t> read_mask_png(const std::string& path);

// Rasterization of binary instance masks to an id raster; on overlap the
// higher-score instance wins (matching the stitching tie-break).
Raster<uint16_t> instances_to_ids(const PlaneInstanceSet& instances, int height,
                                  int width);
PlaneInstanceSet ids_to_instances(const Raster<uint16_t>& ids);

// --- poses and intrinsics: plain text ------------------------------------
// Pose: 12 whitespace-separated values, row-major [R|t], target -> source.
void write_pose(const std::string& path, const RelativePose& pose);
RelativePose read_pose(const std::string& path);

// Intrinsics: `fx fy cx cy` then `width height`.
void write_intrinsics(const std::string& path, const CameraIntrinsics& k);
CameraIntrinsics read_intrinsics(const std::string& path);

// --- debug volumes: text header + raw little-endian float32 --------------
// Invalid cells are stored as NaN.
void write_volume(const std::string& path, const CostVolume& vol);
CostVolume read_volume(const std::string& path);
void write_prob_volume(const std::string& path, const ProbabilityVolume& vol);

// Plane-parameter maps reuse the volume container with 3 slices (x, y, z).
void write_param_map(const std::string& path, const PlaneParamMap& map);
PlaneParamMap read_param_map(const std::string& path);

// --- instance parameter text ----------------------------------------------
// One `id px py pz score [label]` line per instance; ids are 1-based and
// match the mask PNG.
void write_instance_params(const std::string& path,
                           const PlaneInstanceSet& instances);
// Fills pooled_param/score/label of instances matched by id; instances are
// taken from the id raster.
PlaneInstanceSet read_instances(const std::string& mask_path,
                                const std::string& params_path);

// --- run configuration: flat `key = value` text ---------------------------
struct RunConfig {
  std::array<AxisRange, 3> grid = default_ranges();
  int cost_window = 7;
  int aggregation_radius = 2;
  double temperature = 0.05;
  int working_scale = 4;
  int upsample_factor = 4;
  double seg_angle_tol_deg = 10.0;
  double seg_offset_tol = 0.1;
  double seg_min_area_frac = 0.005;
  double fronto_depth_min = 0.25;
  double fronto_depth_max = 10.0;
  int fronto_depth_count = 128;
  double pair_min_translation = 0.05;
  double pair_max_translation = 0.15;

  SweepConfig sweep_config(int threads) const;
  SegmentationConfig segmentation_config() const;
  void validate() const;
};

RunConfig read_config(const std::string& path);
void write_config(const std::string& path, const RunConfig& config);

// --- stereo pair selection -------------------------------------------------
struct TrajectoryFrame {
  std::string path;   // image path or frame name
  Mat3 rotation;      // camera-to-world
  Vec3 translation;
};

// Trajectory file: one `path r11 ... r33 t1 t2 t3` line per frame
// (camera-to-world).
std::vector<TrajectoryFrame> read_trajectory(const std::string& path);

struct StereoPairRecord {
  int target_index = -1;
  int source_index = -1;
  std::string target_path;
  std::string source_path;
  RelativePose relative;  // target -> source
};

// For each target frame, the nearest subsequent frame whose relative
// translation norm lies in [min_t, max_t] (inclusive); targets without a
// qualifying source are skipped.
std::vector<StereoPairRecord> select_pairs(
    std::span<const TrajectoryFrame> frames, double min_t, double max_t);

// --- scene specs ------------------------------------------------------------
void write_scene_spec(const std::string& path, const SceneSpec& spec);
SceneSpec read_scene_spec(const std::string& path);

// --- metric reports ---------------------------------------------------------
// Flat `key value` text and a JSON dump with the same keys.
struct MetricReport {
  std::vector<std::pair<std::string, double>> values;
  void add(const std::string& key, double value);
};
void write_metric_report(const std::string& text_path,
                         const std::string& json_path,
                         const MetricReport& report);

}  // namespace planar
