#include "holosim/fft.hpp"

#include <cmath>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

// FFTW plan creation and destruction mutate shared planner state and are
// not thread safe; execution of a ready plan is.
std::mutex g_planner_mutex;

void run_fftw(std::vector<cplx>& buf, int width, int height, int direction) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    plan = fftw_plan_dft_2d(height, width,
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            direction, FFTW_ESTIMATE);
  }
  if (!plan) throw DataError("transform planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    fftw_destroy_plan(plan);
  }
}

void check_shape(int width, int height) {
  if (width <= 0 || height <= 0) throw DataError("transform input is empty");
}

}  // namespace

int centred_to_natural(int idx, int n) { return (idx + (n + 1) / 2) % n; }

int natural_to_centred(int idx, int n) { return (idx + n / 2) % n; }

Spectrum fft2(const Grid<cplx>& image, double pixel_size_m) {
  check_shape(image.width, image.height);
  std::vector<cplx> buf(image.data);
  run_fftw(buf, image.width, image.height, FFTW_FORWARD);

  Spectrum out;
  out.pixel_size_m = pixel_size_m;
  out.bins = Grid<cplx>(image.width, image.height);
  const double scale =
      1.0 / std::sqrt(static_cast<double>(image.width) * image.height);
  for (int j = 0; j < image.height; ++j) {
    const int jc = natural_to_centred(j, image.height);
    for (int i = 0; i < image.width; ++i) {
      const int ic = natural_to_centred(i, image.width);
      out.bins.at(ic, jc) = buf[static_cast<std::size_t>(j) * image.width + i] * scale;
    }
  }
  return out;
}

Spectrum fft2(const Grid<double>& image, double pixel_size_m) {
  Grid<cplx> tmp(image.width, image.height);
  for (std::size_t i = 0; i < image.data.size(); ++i)
    tmp.data[i] = cplx(image.data[i], 0.0);
  return fft2(tmp, pixel_size_m);
}

Grid<cplx> ifft2(const Spectrum& spectrum) {
  check_shape(spectrum.bins.width, spectrum.bins.height);
  const int w = spectrum.bins.width, h = spectrum.bins.height;
  std::vector<cplx> buf(static_cast<std::size_t>(w) * h);
  for (int jc = 0; jc < h; ++jc) {
    const int j = centred_to_natural(jc, h);
    for (int ic = 0; ic < w; ++ic) {
      const int i = centred_to_natural(ic, w);
      buf[static_cast<std::size_t>(j) * w + i] = spectrum.bins.at(ic, jc);
    }
  }
  run_fftw(buf, w, h, FFTW_BACKWARD);

  Grid<cplx> out(w, h);
  const double scale = 1.0 / std::sqrt(static_cast<double>(w) * h);
  for (std::size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] * scale;
  return out;
}

}  // namespace holosim
