#include "holosim/forward_model.hpp"

#include <algorithm>
#include <cmath>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void validate_inputs(const ObjectMap& object, const BeamProfile& beam) {
  if (object.amplitude.width <= 0 || object.amplitude.height <= 0)
    throw DataError("object map is empty");
  if (!(object.pixel_size_m > 0.0)) throw ConfigError("pixel size must be positive");
  if (!(beam.waist_m > 0.0)) throw ConfigError("beam waist must be positive");
  if (beam.peak_amplitude < 0.0)
    throw ConfigError("beam peak amplitude must be >= 0");
}

void intensity_rows(const ObjectMap& object, const BeamProfile& beam,
                    const TiltConfig& tilt, int y0, int y1, Grid<double>& out) {
  const int w = object.amplitude.width;
  const double pitch = object.pixel_size_m;
  const double inv_w2 = 1.0 / (beam.waist_m * beam.waist_m);
  for (int y = y0; y < y1; ++y) {
    const double py = y * pitch;
    const double dy = py - beam.centre_y_m;
    for (int x = 0; x < w; ++x) {
      const double px = x * pitch;
      const double dx = px - beam.centre_x_m;
      const double g =
          beam.peak_amplitude * std::exp(-(dx * dx + dy * dy) * inv_w2);
      const double phase = kTwoPi * (tilt.fx_cpm * px + tilt.fy_cpm * py);
      const cplx ref = g * cplx(std::cos(phase), -std::sin(phase));
      const cplx obj = g * object.amplitude.at(x, y);
      out.at(x, y) = std::norm(ref + obj);
    }
  }
}

}  // namespace

Grid<double> intensity_map(const ObjectMap& object, const BeamProfile& beam,
                           const TiltConfig& tilt) {
  validate_inputs(object, beam);
  Grid<double> out(object.amplitude.width, object.amplitude.height);
  const int h = out.height;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) intensity_rows(object, beam, tilt, y, y + 1, out);
  return out;
}

Grid<double> intensity_map_serial(const ObjectMap& object,
                                  const BeamProfile& beam,
                                  const TiltConfig& tilt) {
  validate_inputs(object, beam);
  Grid<double> out(object.amplitude.width, object.amplitude.height);
  intensity_rows(object, beam, tilt, 0, out.height, out);
  return out;
}

RateMaps rate_maps(const Grid<double>& intensity, const RateCalibration& cal) {
  if (intensity.width <= 0 || intensity.height <= 0)
    throw DataError("intensity map is empty");
  if (cal.s_heralded < 0.0 || cal.s_nonheralded < 0.0 || cal.background < 0.0)
    throw ConfigError("rate calibration values must be >= 0");

  double imax = 0.0;
  for (const double v : intensity.data) imax = std::max(imax, v);

  RateMaps out;
  out.heralded = Grid<double>(intensity.width, intensity.height);
  out.nonheralded = Grid<double>(intensity.width, intensity.height);
  const double inv = imax > 0.0 ? 1.0 / imax : 0.0;
  for (std::size_t i = 0; i < intensity.data.size(); ++i) {
    const double rel = intensity.data[i] * inv;
    out.heralded.data[i] = cal.s_heralded * rel;
    out.nonheralded.data[i] = cal.s_nonheralded * rel + cal.background;
  }
  return out;
}

ObjectMap make_flat(int width, int height, double pixel_size_m,
                    double amplitude) {
  ObjectMap o;
  o.pixel_size_m = pixel_size_m;
  o.amplitude = Grid<cplx>(width, height, cplx(amplitude, 0.0));
  return o;
}

ObjectMap make_mirror(int width, int height, double pixel_size_m) {
  return make_flat(width, height, pixel_size_m, 1.0);
}

ObjectMap make_half_circles(int width, int height, double pixel_size_m,
                            double radius_frac, double gap_frac,
                            double amplitude) {
  ObjectMap o;
  o.pixel_size_m = pixel_size_m;
  o.amplitude = Grid<cplx>(width, height, cplx(0.0, 0.0));
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  const double scale = std::min(width, height);
  const double r = radius_frac * scale;
  const double half_gap = 0.5 * gap_frac * scale;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - cx, dy = y - cy;
      const bool inside = dx * dx + dy * dy <= r * r;
      const bool in_gap = std::abs(dy) < half_gap;
      if (inside && !in_gap) o.amplitude.at(x, y) = cplx(amplitude, 0.0);
    }
  }
  return o;
}

PhaseStepObject make_phase_step(int width, int height, double pixel_size_m,
                                double step_rad, double cover_frac) {
  if (!(cover_frac > 0.0 && cover_frac < 1.0))
    throw ConfigError("phase-step cover fraction must lie in (0, 1)");
  PhaseStepObject out;
  out.step_rad = step_rad;
  out.map = make_mirror(width, height, pixel_size_m);
  out.stepped = Grid<std::uint8_t>(width, height, 0);
  const int edge = static_cast<int>(cover_frac * width);
  const cplx plate(std::cos(step_rad), std::sin(step_rad));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < edge; ++x) {
      out.map.amplitude.at(x, y) *= plate;
      out.stepped.at(x, y) = 1;
    }
  }
  return out;
}

BeamProfile centred_beam(int width, int height, double pixel_size_m,
                         double waist_frac, double peak) {
  BeamProfile b;
  b.centre_x_m = (width - 1) / 2.0 * pixel_size_m;
  b.centre_y_m = (height - 1) / 2.0 * pixel_size_m;
  b.waist_m = waist_frac * width * pixel_size_m;
  b.peak_amplitude = peak;
  return b;
}

TiltConfig tilt_from_cycles(int width, int height, double pixel_size_m,
                            double cycles_x, double cycles_y) {
  TiltConfig t;
  t.fx_cpm = cycles_x / (width * pixel_size_m);
  t.fy_cpm = cycles_y / (height * pixel_size_m);
  return t;
}

}  // namespace holosim
