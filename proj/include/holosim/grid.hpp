#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace holosim {

// Dense row-major 2D array.  x runs along a row (fast axis), y selects the
// row, matching the scan order of the acquisition loop.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return data.size(); }
  bool same_shape(int w, int h) const { return width == w && height == h; }
};

using cplx = std::complex<double>;

// Counts acquired per scan pixel for one detection channel.
struct HologramFrame {
  Grid<std::int64_t> counts;
  double pixel_size_m = 30e-6;
  double integration_s = 0.0;
  std::string channel;  // "heralded", "nonheralded" or "triples"
};

// Complex image-plane field (amplitude and phase per pixel).
struct ComplexField {
  Grid<cplx> field;
  double pixel_size_m = 30e-6;
};

// DC-centred discrete spectrum: the zero-frequency bin sits at
// (width/2, height/2) and bin (i, j) holds frequency index
// (i - width/2, j - height/2).
struct Spectrum {
  Grid<cplx> bins;
  double pixel_size_m = 30e-6;

  int centre_x() const { return bins.width / 2; }
  int centre_y() const { return bins.height / 2; }
};

}  // namespace holosim
