#include "planar/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace planar {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

[[noreturn]] void fail_at(const std::string& path, const std::string& what,
                          long offset) {
  throw std::runtime_error(path + ": " + what + " at byte offset " +
                           std::to_string(offset));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void swap_float_bytes(float* data, size_t count) {
  auto* bytes = reinterpret_cast<unsigned char*>(data);
  for (size_t i = 0; i < count; ++i) {
    std::swap(bytes[4 * i + 0], bytes[4 * i + 3]);
    std::swap(bytes[4 * i + 1], bytes[4 * i + 2]);
  }
}

struct FileCloser {
  FILE* fp = nullptr;
  ~FileCloser() {
    if (fp) std::fclose(fp);
  }
};

std::vector<double> parse_doubles(const std::string& path, size_t expected) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (values.size() != expected) {
    fail(path, "expected " + std::to_string(expected) + " numbers, found " +
                   std::to_string(values.size()));
  }
  return values;
}

}  // namespace

// ---------------------------------------------------------------- PFM ----

void write_pfm(const std::string& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";
  // Rows bottom-to-top per the PFM convention; invalid pixels as 0.
  std::vector<float> row(depth.width());
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) {
      row[x] = depth.valid.at(y, x)
                   ? static_cast<float>(depth.values.at(y, x))
                   : 0.0f;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) fail(path, "write failed");
}

DepthMap read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string magic;
  in >> magic;
  if (magic != "Pf") {
    fail_at(path, "not a grayscale PFM (magic '" + magic + "')", 0);
  }
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  if (!in || w <= 0 || h <= 0 || scale == 0.0) {
    fail_at(path, "malformed PFM header", static_cast<long>(in.tellg()));
  }
  in.get();  // single whitespace byte after the scale
  const long payload_start = static_cast<long>(in.tellg());
  DepthMap depth(h, w);
  std::vector<float> row(w);
  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) {
      fail_at(path, "truncated PFM payload",
              payload_start +
                  static_cast<long>((h - 1 - y) * w * sizeof(float)));
    }
    if (file_little != host_little) {
      swap_float_bytes(row.data(), row.size());
    }
    for (int x = 0; x < w; ++x) {
      const float v = row[x];
      if (v > 0.0f && std::isfinite(v)) {
        depth.values.at(y, x) = v;
        depth.valid.at(y, x) = 1;
      }
    }
  }
  return depth;
}

// ---------------------------------------------------------------- PNG ----

namespace {

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

void read_png_rows(const std::string& path, int expected_bit_depth,
                   int* out_w, int* out_h, int* out_channels,
                   int* out_bit_depth, std::vector<std::vector<png_byte>>* rows) {
  FileCloser file{std::fopen(path.c_str(), "rb")};
  if (!file.fp) fail(path, "cannot open");
  PngReader ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
  if (!ctx.png) fail(path, "png init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) fail(path, "png init failed");
  if (setjmp(png_jmpbuf(ctx.png))) {
    fail(path, "malformed PNG");
  }
  png_init_io(ctx.png, file.fp);
  png_read_info(ctx.png, ctx.info);

  png_set_palette_to_rgb(ctx.png);
  png_set_expand_gray_1_2_4_to_8(ctx.png);
  png_set_strip_alpha(ctx.png);
  if (expected_bit_depth == 8 && png_get_bit_depth(ctx.png, ctx.info) == 16) {
    png_set_strip_16(ctx.png);
  }
  if (png_get_bit_depth(ctx.png, ctx.info) == 16 &&
      std::endian::native == std::endian::little) {
    png_set_swap(ctx.png);
  }
  png_read_update_info(ctx.png, ctx.info);

  *out_w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  *out_h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  *out_channels = png_get_channels(ctx.png, ctx.info);
  *out_bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  const size_t row_bytes = png_get_rowbytes(ctx.png, ctx.info);

  rows->assign(*out_h, std::vector<png_byte>(row_bytes));
  std::vector<png_bytep> row_ptrs(*out_h);
  for (int y = 0; y < *out_h; ++y) row_ptrs[y] = (*rows)[y].data();
  png_read_image(ctx.png, row_ptrs.data());
  png_read_end(ctx.png, nullptr);
}

void write_png_rows(const std::string& path, int w, int h, int channels,
                    int bit_depth, std::vector<std::vector<png_byte>>& rows) {
  FileCloser file{std::fopen(path.c_str(), "wb")};
  if (!file.fp) fail(path, "cannot open for writing");
  PngWriter ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
  if (!ctx.png) fail(path, "png init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) fail(path, "png init failed");
  if (setjmp(png_jmpbuf(ctx.png))) {
    fail(path, "png write failed");
  }
  png_init_io(ctx.png, file.fp);
  const int color =
      channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(ctx.png, ctx.info, w, h, bit_depth, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) {
    png_set_swap(ctx.png);
  }
  std::vector<png_bytep> row_ptrs(h);
  for (int y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
  png_write_image(ctx.png, row_ptrs.data());
  png_write_end(ctx.png, nullptr);
}

}  // namespace

void write_png(const std::string& path, const ImageRaster& img) {
  if (img.channels != 1 && img.channels != 3) {
    fail(path, "images must have 1 or 3 channels");
  }
  std::vector<std::vector<png_byte>> rows(
      img.height, std::vector<png_byte>(
                      static_cast<size_t>(img.width) * img.channels));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
        rows[y][static_cast<size_t>(x) * img.channels + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
  }
  write_png_rows(path, img.width, img.height, img.channels, 8, rows);
}

ImageRaster read_png(const std::string& path) {
  int w, h, channels, bit_depth;
  std::vector<std::vector<png_byte>> rows;
  read_png_rows(path, 8, &w, &h, &channels, &bit_depth, &rows);
  if (bit_depth != 8 || (channels != 1 && channels != 3)) {
    fail(path, "unsupported PNG layout for images");
  }
  ImageRaster img(h, w, channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(y, x, c) =
            rows[y][static_cast<size_t>(x) * channels + c] / 255.0;
      }
    }
  }
  return img;
}

void write_mask_png(const std::string& path, const Raster<uint16_t>& ids) {
  std::vector<std::vector<png_byte>> rows(
      ids.height,
      std::vector<png_byte>(static_cast<size_t>(ids.width) * 2));
  for (int y = 0; y < ids.height; ++y) {
    std::memcpy(rows[y].data(), &ids.data[static_cast<size_t>(y) * ids.width],
                static_cast<size_t>(ids.width) * 2);
  }
  write_png_rows(path, ids.width, ids.height, 1, 16, rows);
}

Raster<uint16_t> read_mask_png(const std::string& path) {
  int w, h, channels, bit_depth;
  std::vector<std::vector<png_byte>> rows;
  read_png_rows(path, 16, &w, &h, &channels, &bit_depth, &rows);
  if (channels != 1) fail(path, "mask PNG must be single-channel");
  Raster<uint16_t> ids(h, w, 0);
  if (bit_depth == 16) {
    for (int y = 0; y < h; ++y) {
      std::memcpy(&ids.data[static_cast<size_t>(y) * w], rows[y].data(),
                  static_cast<size_t>(w) * 2);
    }
  } else if (bit_depth == 8) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) ids.at(y, x) = rows[y][x];
    }
  } else {
    fail(path, "unsupported mask bit depth");
  }
  return ids;
}

Raster<uint16_t> instances_to_ids(const PlaneInstanceSet& instances, int height,
                                  int width) {
  if (instances.size() > 65535) {
    throw std::invalid_argument("too many instances for a 16-bit id raster");
  }
  std::vector<int> order(instances.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  // Ascending score so the highest-score instance paints last.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return instances[a].score < instances[b].score;
  });
  Raster<uint16_t> ids(height, width, 0);
  for (int i : order) {
    const SoftMask& m = instances[i].mask;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (m.sigma.at(y, x) > 0.5) {
          ids.at(y, x) = static_cast<uint16_t>(i + 1);
        }
      }
    }
  }
  return ids;
}

PlaneInstanceSet ids_to_instances(const Raster<uint16_t>& ids) {
  uint16_t max_id = 0;
  for (uint16_t v : ids.data) max_id = std::max(max_id, v);
  PlaneInstanceSet out(max_id);
  for (uint16_t i = 0; i < max_id; ++i) {
    out[i].mask = SoftMask(ids.height, ids.width, 0.0);
  }
  for (int y = 0; y < ids.height; ++y) {
    for (int x = 0; x < ids.width; ++x) {
      const uint16_t id = ids.at(y, x);
      if (id > 0) out[id - 1].mask.sigma.at(y, x) = 1.0;
    }
  }
  return out;
}

// ------------------------------------------------------ poses/intrinsics --

void write_pose(const std::string& path, const RelativePose& pose) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out << format_double(pose.rotation(r, c)) << " ";
    }
    out << format_double(pose.translation(r)) << "\n";
  }
}

RelativePose read_pose(const std::string& path) {
  const std::vector<double> v = parse_doubles(path, 12);
  RelativePose pose;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      pose.rotation(r, c) = v[r * 4 + c];
    }
    pose.translation(r) = v[r * 4 + 3];
  }
  pose.validate();
  return pose;
}

void write_intrinsics(const std::string& path, const CameraIntrinsics& k) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << format_double(k.fx) << " " << format_double(k.fy) << " "
      << format_double(k.cx) << " " << format_double(k.cy) << "\n"
      << k.width << " " << k.height << "\n";
}

CameraIntrinsics read_intrinsics(const std::string& path) {
  const std::vector<double> v = parse_doubles(path, 6);
  CameraIntrinsics k;
  k.fx = v[0];
  k.fy = v[1];
  k.cx = v[2];
  k.cy = v[3];
  k.width = static_cast<int>(v[4]);
  k.height = static_cast<int>(v[5]);
  k.validate();
  return k;
}

// ---------------------------------------------------------- raw volumes --

namespace {

void write_fvol(const std::string& path, int n, int h, int w,
                const std::vector<float>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out << "FVOL\n" << n << " " << h << " " << w << "\n";
  std::vector<float> data = payload;
  if (std::endian::native == std::endian::big) {
    swap_float_bytes(data.data(), data.size());
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) fail(path, "write failed");
}

void read_fvol(const std::string& path, int* n, int* h, int* w,
               std::vector<float>* payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string magic;
  in >> magic;
  if (magic != "FVOL") fail_at(path, "bad volume magic", 0);
  in >> *n >> *h >> *w;
  if (!in || *n <= 0 || *h <= 0 || *w <= 0) {
    fail_at(path, "malformed volume header", static_cast<long>(in.tellg()));
  }
  in.get();  // newline
  const size_t count =
      static_cast<size_t>(*n) * static_cast<size_t>(*h) * *w;
  payload->assign(count, 0.0f);
  const long payload_start = static_cast<long>(in.tellg());
  in.read(reinterpret_cast<char*>(payload->data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != count * sizeof(float)) {
    fail_at(path, "truncated volume payload",
            payload_start + static_cast<long>(in.gcount()));
  }
  if (std::endian::native == std::endian::big) {
    swap_float_bytes(payload->data(), payload->size());
  }
}

}  // namespace

void write_volume(const std::string& path, const CostVolume& vol) {
  std::vector<float> payload(vol.cost.size());
  for (size_t i = 0; i < vol.cost.size(); ++i) {
    payload[i] = vol.valid[i] ? static_cast<float>(vol.cost[i])
                              : std::numeric_limits<float>::quiet_NaN();
  }
  write_fvol(path, vol.num_hypotheses, vol.height, vol.width, payload);
}

CostVolume read_volume(const std::string& path) {
  int n, h, w;
  std::vector<float> payload;
  read_fvol(path, &n, &h, &w, &payload);
  CostVolume vol(n, h, w);
  for (size_t i = 0; i < payload.size(); ++i) {
    if (std::isfinite(payload[i])) {
      vol.cost[i] = payload[i];
      vol.valid[i] = 1;
    }
  }
  return vol;
}

void write_prob_volume(const std::string& path, const ProbabilityVolume& vol) {
  std::vector<float> payload(vol.prob.size());
  for (int j = 0; j < vol.num_hypotheses; ++j) {
    for (int y = 0; y < vol.height; ++y) {
      for (int x = 0; x < vol.width; ++x) {
        const size_t i = vol.index(j, y, x);
        payload[i] = vol.valid.at(y, x)
                         ? static_cast<float>(vol.prob[i])
                         : std::numeric_limits<float>::quiet_NaN();
      }
    }
  }
  write_fvol(path, vol.num_hypotheses, vol.height, vol.width, payload);
}

void write_param_map(const std::string& path, const PlaneParamMap& map) {
  const size_t plane = static_cast<size_t>(map.height) * map.width;
  std::vector<float> payload(3 * plane);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const size_t i = static_cast<size_t>(y) * map.width + x;
      for (int c = 0; c < 3; ++c) {
        payload[c * plane + i] =
            map.valid.at(y, x) ? static_cast<float>(map.at(y, x)[c])
                               : std::numeric_limits<float>::quiet_NaN();
      }
    }
  }
  write_fvol(path, 3, map.height, map.width, payload);
}

PlaneParamMap read_param_map(const std::string& path) {
  int n, h, w;
  std::vector<float> payload;
  read_fvol(path, &n, &h, &w, &payload);
  if (n != 3) fail(path, "parameter map must have exactly 3 slices");
  PlaneParamMap map(h, w);
  const size_t plane = static_cast<size_t>(h) * w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const float px = payload[i];
      const float py = payload[plane + i];
      const float pz = payload[2 * plane + i];
      if (std::isfinite(px) && std::isfinite(py) && std::isfinite(pz)) {
        map.at(y, x) = Vec3(px, py, pz);
        map.valid.at(y, x) = 1;
      }
    }
  }
  return map;
}

// ------------------------------------------------------- instance text --

void write_instance_params(const std::string& path,
                           const PlaneInstanceSet& instances) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  for (size_t i = 0; i < instances.size(); ++i) {
    const PlaneInstance& inst = instances[i];
    const Vec3 p =
        inst.pooled_param.has_value() ? inst.pooled_param->p : Vec3::Zero();
    out << (i + 1) << " " << format_double(p.x()) << " "
        << format_double(p.y()) << " " << format_double(p.z()) << " "
        << format_double(inst.score);
    if (inst.semantic_label.has_value()) {
      out << " " << *inst.semantic_label;
    }
    out << "\n";
  }
}

PlaneInstanceSet read_instances(const std::string& mask_path,
                                const std::string& params_path) {
  PlaneInstanceSet out = ids_to_instances(read_mask_png(mask_path));
  std::ifstream in(params_path);
  if (!in) fail(params_path, "cannot open");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    size_t id;
    double px, py, pz, score;
    if (!(ss >> id >> px >> py >> pz >> score)) {
      fail(params_path, "malformed instance line " + std::to_string(lineno));
    }
    if (id == 0 || id > out.size()) {
      fail(params_path, "instance id " + std::to_string(id) +
                            " has no mask (line " + std::to_string(lineno) +
                            ")");
    }
    PlaneInstance& inst = out[id - 1];
    inst.pooled_param = PlaneParam(px, py, pz);
    inst.score = score;
    int label;
    if (ss >> label) inst.semantic_label = label;
  }
  return out;
}

// ------------------------------------------------------------- config --

SweepConfig RunConfig::sweep_config(int threads) const {
  SweepConfig c;
  c.cost_window = cost_window;
  c.aggregation_radius = aggregation_radius;
  c.temperature = temperature;
  c.working_scale = working_scale;
  c.upsample_factor = upsample_factor;
  c.threads = threads;
  return c;
}

SegmentationConfig RunConfig::segmentation_config() const {
  SegmentationConfig c;
  c.angle_tol_deg = seg_angle_tol_deg;
  c.offset_tol = seg_offset_tol;
  c.min_area_frac = seg_min_area_frac;
  return c;
}

void RunConfig::validate() const {
  for (const AxisRange& r : grid) r.validate();
  sweep_config(1).validate();
  if (!(seg_angle_tol_deg > 0.0) || !(seg_offset_tol > 0.0) ||
      !(seg_min_area_frac >= 0.0 && seg_min_area_frac <= 1.0)) {
    throw std::invalid_argument("invalid segmentation tolerances");
  }
  if (!(fronto_depth_min > 0.0) || !(fronto_depth_max > fronto_depth_min) ||
      fronto_depth_count < 2) {
    throw std::invalid_argument("invalid fronto depth range");
  }
  if (!(pair_min_translation >= 0.0) ||
      !(pair_max_translation >= pair_min_translation)) {
    throw std::invalid_argument("invalid pair translation bounds");
  }
}

RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  RunConfig cfg;
  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto set_double = [](double* dst) {
    return [dst](const std::string& s) { *dst = std::stod(s); };
  };
  auto set_int = [](int* dst) {
    return [dst](const std::string& s) { *dst = std::stoi(s); };
  };
  setters["grid_x_lo"] = set_double(&cfg.grid[0].lo);
  setters["grid_x_hi"] = set_double(&cfg.grid[0].hi);
  setters["grid_x_count"] = set_int(&cfg.grid[0].count);
  setters["grid_y_lo"] = set_double(&cfg.grid[1].lo);
  setters["grid_y_hi"] = set_double(&cfg.grid[1].hi);
  setters["grid_y_count"] = set_int(&cfg.grid[1].count);
  setters["grid_z_lo"] = set_double(&cfg.grid[2].lo);
  setters["grid_z_hi"] = set_double(&cfg.grid[2].hi);
  setters["grid_z_count"] = set_int(&cfg.grid[2].count);
  setters["cost_window"] = set_int(&cfg.cost_window);
  setters["aggregation_radius"] = set_int(&cfg.aggregation_radius);
  setters["temperature"] = set_double(&cfg.temperature);
  setters["working_scale"] = set_int(&cfg.working_scale);
  setters["upsample_factor"] = set_int(&cfg.upsample_factor);
  setters["seg_angle_tol_deg"] = set_double(&cfg.seg_angle_tol_deg);
  setters["seg_offset_tol"] = set_double(&cfg.seg_offset_tol);
  setters["seg_min_area_frac"] = set_double(&cfg.seg_min_area_frac);
  setters["fronto_depth_min"] = set_double(&cfg.fronto_depth_min);
  setters["fronto_depth_max"] = set_double(&cfg.fronto_depth_max);
  setters["fronto_depth_count"] = set_int(&cfg.fronto_depth_count);
  setters["pair_min_translation"] = set_double(&cfg.pair_min_translation);
  setters["pair_max_translation"] = set_double(&cfg.pair_max_translation);

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const size_t eq = line.find('=');
    std::string key = line.substr(0, eq == std::string::npos ? line.size() : eq);
    auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t\r");
      const size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    key = trim(key);
    if (key.empty()) continue;
    if (eq == std::string::npos) {
      fail(path, "missing '=' on line " + std::to_string(lineno));
    }
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      fail(path, "unknown config key '" + key + "' on line " +
                     std::to_string(lineno));
    }
    try {
      it->second(value);
    } catch (const std::exception&) {
      fail(path, "bad value for '" + key + "' on line " +
                     std::to_string(lineno));
    }
  }
  cfg.validate();
  return cfg;
}

void write_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << "grid_x_lo = " << format_double(cfg.grid[0].lo) << "\n";
  out << "grid_x_hi = " << format_double(cfg.grid[0].hi) << "\n";
  out << "grid_x_count = " << cfg.grid[0].count << "\n";
  out << "grid_y_lo = " << format_double(cfg.grid[1].lo) << "\n";
  out << "grid_y_hi = " << format_double(cfg.grid[1].hi) << "\n";
  out << "grid_y_count = " << cfg.grid[1].count << "\n";
  out << "grid_z_lo = " << format_double(cfg.grid[2].lo) << "\n";
  out << "grid_z_hi = " << format_double(cfg.grid[2].hi) << "\n";
  out << "grid_z_count = " << cfg.grid[2].count << "\n";
  out << "cost_window = " << cfg.cost_window << "\n";
  out << "aggregation_radius = " << cfg.aggregation_radius << "\n";
  out << "temperature = " << format_double(cfg.temperature) << "\n";
  out << "working_scale = " << cfg.working_scale << "\n";
  out << "upsample_factor = " << cfg.upsample_factor << "\n";
  out << "seg_angle_tol_deg = " << format_double(cfg.seg_angle_tol_deg) << "\n";
  out << "seg_offset_tol = " << format_double(cfg.seg_offset_tol) << "\n";
  out << "seg_min_area_frac = " << format_double(cfg.seg_min_area_frac) << "\n";
  out << "fronto_depth_min = " << format_double(cfg.fronto_depth_min) << "\n";
  out << "fronto_depth_max = " << format_double(cfg.fronto_depth_max) << "\n";
  out << "fronto_depth_count = " << cfg.fronto_depth_count << "\n";
  out << "pair_min_translation = " << format_double(cfg.pair_min_translation)
      << "\n";
  out << "pair_max_translation = " << format_double(cfg.pair_max_translation)
      << "\n";
}

// ------------------------------------------------------------- pairs --

std::vector<TrajectoryFrame> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::vector<TrajectoryFrame> frames;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    TrajectoryFrame f;
    ss >> f.path;
    std::array<double, 12> v{};
    for (double& x : v) {
      if (!(ss >> x)) {
        fail(path, "malformed trajectory line " + std::to_string(lineno));
      }
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) f.rotation(r, c) = v[r * 4 + c];
      f.translation(r) = v[r * 4 + 3];
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<StereoPairRecord> select_pairs(
    std::span<const TrajectoryFrame> frames, double min_t, double max_t) {
  std::vector<StereoPairRecord> pairs;
  for (size_t i = 0; i + 1 < frames.size(); ++i) {
    for (size_t j = i + 1; j < frames.size(); ++j) {
      // Frames are camera-to-world; the camera-center distance equals the
      // relative translation norm.
      const double norm = (frames[i].translation - frames[j].translation).norm();
      if (norm < min_t || norm > max_t) continue;
      StereoPairRecord rec;
      rec.target_index = static_cast<int>(i);
      rec.source_index = static_cast<int>(j);
      rec.target_path = frames[i].path;
      rec.source_path = frames[j].path;
      rec.relative.rotation = frames[j].rotation.transpose() * frames[i].rotation;
      rec.relative.translation = frames[j].rotation.transpose() *
                                 (frames[i].translation - frames[j].translation);
      pairs.push_back(std::move(rec));
      break;  // nearest subsequent qualifying frame
    }
  }
  return pairs;
}

// --------------------------------------------------------- scene specs --

void write_scene_spec(const std::string& path, const SceneSpec& spec) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  const CameraIntrinsics& k = spec.intrinsics;
  out << "intrinsics " << format_double(k.fx) << " " << format_double(k.fy)
      << " " << format_double(k.cx) << " " << format_double(k.cy) << " "
      << k.width << " " << k.height << "\n";
  out << "pose";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out << " " << format_double(spec.pose.rotation(r, c));
    }
    out << " " << format_double(spec.pose.translation(r));
  }
  out << "\n";
  out << "background " << format_double(spec.background_depth) << " "
      << spec.background_texture_seed << "\n";
  out << "texture " << format_double(spec.texture.cell_size) << " "
      << format_double(spec.texture.contrast) << " "
      << (spec.texture.textureless ? 1 : 0) << "\n";
  for (const ScenePlane& pl : spec.planes) {
    out << "plane " << format_double(pl.param.p.x()) << " "
        << format_double(pl.param.p.y()) << " " << format_double(pl.param.p.z())
        << " " << pl.texture_seed << " " << pl.polygon.size();
    for (const Vec2& v : pl.polygon) {
      out << " " << format_double(v.x()) << " " << format_double(v.y());
    }
    out << "\n";
  }
}

SceneSpec read_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  SceneSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    bool ok = true;
    if (tag == "intrinsics") {
      ok = static_cast<bool>(ss >> spec.intrinsics.fx >> spec.intrinsics.fy >>
                             spec.intrinsics.cx >> spec.intrinsics.cy >>
                             spec.intrinsics.width >> spec.intrinsics.height);
    } else if (tag == "pose") {
      for (int r = 0; r < 3 && ok; ++r) {
        for (int c = 0; c < 3; ++c) ok = ok && (ss >> spec.pose.rotation(r, c));
        ok = ok && (ss >> spec.pose.translation(r));
      }
    } else if (tag == "background") {
      ok = static_cast<bool>(ss >> spec.background_depth >>
                             spec.background_texture_seed);
    } else if (tag == "texture") {
      int flat = 0;
      ok = static_cast<bool>(ss >> spec.texture.cell_size >>
                             spec.texture.contrast >> flat);
      spec.texture.textureless = flat != 0;
    } else if (tag == "plane") {
      ScenePlane pl;
      size_t nverts = 0;
      ok = static_cast<bool>(ss >> pl.param.p.x() >> pl.param.p.y() >>
                             pl.param.p.z() >> pl.texture_seed >> nverts);
      for (size_t i = 0; i < nverts && ok; ++i) {
        Vec2 v;
        ok = static_cast<bool>(ss >> v.x() >> v.y());
        pl.polygon.push_back(v);
      }
      if (ok) spec.planes.push_back(std::move(pl));
    } else {
      fail(path, "unknown scene tag '" + tag + "' on line " +
                     std::to_string(lineno));
    }
    if (!ok) {
      fail(path, "malformed scene line " + std::to_string(lineno));
    }
  }
  spec.validate();
  return spec;
}

// ------------------------------------------------------ metric reports --

void MetricReport::add(const std::string& key, double value) {
  values.emplace_back(key, value);
}

void write_metric_report(const std::string& text_path,
                         const std::string& json_path,
                         const MetricReport& report) {
  if (!text_path.empty()) {
    std::ofstream out(text_path);
    if (!out) fail(text_path, "cannot open for writing");
    for (const auto& [key, value] : report.values) {
      out << key << " " << format_double(value) << "\n";
    }
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) fail(json_path, "cannot open for writing");
    out << "{\n";
    for (size_t i = 0; i < report.values.size(); ++i) {
      out << "  \"" << report.values[i].first
          << "\": " << format_double(report.values[i].second);
      out << (i + 1 < report.values.size() ? ",\n" : "\n");
    }
    out << "}\n";
  }
}

}  // namespace planar
