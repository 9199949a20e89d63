#pragma once

#include <cstdint>
#include <vector>

namespace planar {

// Row-major 2D array. (x, y) = (column, row); (0, 0) is the top-left pixel
// and integer coordinates address pixel centers.
template <typename T>
struct Raster {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int h, int w, T fill = T{})
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  T& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  const T& at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }

  bool inside(int y, int x) const {
    return y >= 0 && y < height && x >= 0 && x < width;
  }

  size_t size() const { return data.size(); }

  template <typename U>
  bool same_shape(const Raster<U>& other) const {
    return height == other.height && width == other.width;
  }
};

using ValidityRaster = Raster<uint8_t>;

}  // namespace planar
