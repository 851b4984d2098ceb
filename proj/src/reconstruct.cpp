#include "holosim/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

// Magnitude threshold: the peak must exceed this multiple of the median
// half-plane magnitude before it counts as a carrier order.
constexpr double kPeakOverFloor = 8.0;

bool mask_contains(const OrderMask& m, int du, int dv) {
  const std::int64_t ru = du - m.centre_u;
  const std::int64_t rv = dv - m.centre_v;
  if (m.shape == MaskShape::rect)
    return std::abs(ru) <= m.radius && std::abs(rv) <= m.radius;
  return ru * ru + rv * rv <=
         static_cast<std::int64_t>(m.radius) * m.radius;
}

}  // namespace

int default_mask_radius(int width, int height) {
  return std::max(1, std::min(width, height) / 8);
}

OrderLocation locate_first_order(const Spectrum& spec, int guard_radius) {
  const int w = spec.bins.width, h = spec.bins.height;
  if (w <= 0 || h <= 0) throw DataError("spectrum is empty");
  const int cx = spec.centre_x(), cy = spec.centre_y();
  if (guard_radius < 0) guard_radius = std::max(2, std::min(w, h) / 16);

  OrderLocation best;
  bool found = false;
  std::vector<double> mags;
  for (int j = 0; j < h; ++j) {
    const int dv = j - cy;
    for (int i = 0; i < w; ++i) {
      const int du = i - cx;
      if (!(dv > 0 || (dv == 0 && du > 0))) continue;
      if (std::abs(du) <= guard_radius && std::abs(dv) <= guard_radius)
        continue;
      const double mag = std::abs(spec.bins.at(i, j));
      mags.push_back(mag);
      if (!found || mag > best.peak_mag) {
        best.u = du;
        best.v = dv;
        best.peak_mag = mag;
        found = true;
      }
    }
  }
  if (!found || mags.empty())
    throw StatError("no spectrum bins available outside the DC guard");

  std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
  best.floor_mag = mags[mags.size() / 2];
  if (best.peak_mag <= 0.0 ||
      best.peak_mag < kPeakOverFloor * best.floor_mag)
    throw StatError("no carrier order stands above the spectral floor");
  return best;
}

Spectrum isolate_order(const Spectrum& spec, const OrderMask& mask) {
  const int w = spec.bins.width, h = spec.bins.height;
  if (w <= 0 || h <= 0) throw DataError("spectrum is empty");
  if (mask.radius < 0) throw ConfigError("mask radius must be >= 0");
  const int cx = spec.centre_x(), cy = spec.centre_y();

  // Representable centred frequencies: du in [-cx, w-1-cx], dv likewise.
  const bool full_cover = mask.shape == MaskShape::rect &&
                          mask.centre_u - mask.radius <= -cx &&
                          mask.centre_u + mask.radius >= w - 1 - cx &&
                          mask.centre_v - mask.radius <= -cy &&
                          mask.centre_v + mask.radius >= h - 1 - cy;
  if (full_cover) return spec;  // keeps everything: the identity passband

  if (mask.centre_u - mask.radius <= -cx ||
      mask.centre_u + mask.radius >= w - 1 - cx ||
      mask.centre_v - mask.radius <= -cy ||
      mask.centre_v + mask.radius >= h - 1 - cy)
    throw ConfigError("order mask touches the Nyquist boundary");
  if ((mask.centre_u != 0 || mask.centre_v != 0) && mask_contains(mask, 0, 0))
    throw ConfigError("order mask reaches the DC bin");

  Spectrum out;
  out.pixel_size_m = spec.pixel_size_m;
  out.bins = Grid<cplx>(w, h, cplx(0.0, 0.0));
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (mask_contains(mask, i - cx, j - cy))
        out.bins.at(i, j) = spec.bins.at(i, j);
  return out;
}

ComplexField reconstruct(const Spectrum& isolated) {
  ComplexField out;
  out.pixel_size_m = isolated.pixel_size_m;
  out.field = ifft2(isolated);
  return out;
}

ComplexField linear_phase_reference(const Spectrum& spec, int centre_u,
                                    int centre_v, int half_width) {
  const int w = spec.bins.width, h = spec.bins.height;
  if (w <= 0 || h <= 0) throw DataError("spectrum is empty");
  if (half_width < 1) throw ConfigError("reference half width must be >= 1");
  const int cx = spec.centre_x(), cy = spec.centre_y();

  // Square block of bins straddling the order centre: indices
  // centre - half_width + 1 .. centre + half_width in both directions.
  const int u0 = centre_u - half_width + 1, u1 = centre_u + half_width;
  const int v0 = centre_v - half_width + 1, v1 = centre_v + half_width;
  if (u0 < -cx || u1 > w - 1 - cx || v0 < -cy || v1 > h - 1 - cy)
    throw ConfigError("reference block leaves the spectrum");

  Spectrum block;
  block.pixel_size_m = spec.pixel_size_m;
  block.bins = Grid<cplx>(w, h, cplx(0.0, 0.0));
  for (int dv = v0; dv <= v1; ++dv)
    for (int du = u0; du <= u1; ++du)
      block.bins.at(du + cx, dv + cy) = spec.bins.at(du + cx, dv + cy);

  ComplexField out;
  out.pixel_size_m = spec.pixel_size_m;
  out.field = ifft2(block);
  return out;
}

ComplexField remove_linear_phase(const ComplexField& field,
                                 const ComplexField& reference) {
  if (!field.field.same_shape(reference.field.width, reference.field.height))
    throw DataError("field and reference shapes differ");
  ComplexField out;
  out.pixel_size_m = field.pixel_size_m;
  out.field = Grid<cplx>(field.field.width, field.field.height);
  for (std::size_t i = 0; i < out.field.data.size(); ++i) {
    const cplx r = reference.field.data[i];
    out.field.data[i] = field.field.data[i] * std::conj(r);
  }
  return out;
}

ComplexField reconstruct_recentred(const Spectrum& spec,
                                   const OrderMask& mask) {
  const Spectrum isolated = isolate_order(spec, mask);
  const int w = isolated.bins.width, h = isolated.bins.height;
  Spectrum shifted;
  shifted.pixel_size_m = isolated.pixel_size_m;
  shifted.bins = Grid<cplx>(w, h, cplx(0.0, 0.0));
  for (int j = 0; j < h; ++j) {
    const int jd = ((j - mask.centre_v) % h + h) % h;
    for (int i = 0; i < w; ++i) {
      const int id = ((i - mask.centre_u) % w + w) % w;
      shifted.bins.at(id, jd) = isolated.bins.at(i, j);
    }
  }
  return reconstruct(shifted);
}

namespace {

ReconstructionResult reconstruct_from_spectrum(const Spectrum& spec,
                                               ReconstructionMethod method,
                                               int mask_radius,
                                               int ref_half_width,
                                               MaskShape shape) {
  ReconstructionResult out;
  out.order = locate_first_order(spec);
  out.mask.centre_u = out.order.u;
  out.mask.centre_v = out.order.v;
  out.mask.radius = mask_radius >= 0
                        ? mask_radius
                        : default_mask_radius(spec.bins.width, spec.bins.height);
  out.mask.shape = shape;

  if (method == ReconstructionMethod::recentre) {
    out.object = reconstruct_recentred(spec, out.mask);
    return out;
  }
  const ComplexField raw = reconstruct(isolate_order(spec, out.mask));
  const ComplexField ref = linear_phase_reference(spec, out.order.u,
                                                  out.order.v, ref_half_width);
  out.object = remove_linear_phase(raw, ref);
  return out;
}

}  // namespace

ReconstructionResult reconstruct_hologram(const HologramFrame& frame,
                                          ReconstructionMethod method,
                                          int mask_radius, int ref_half_width,
                                          MaskShape shape) {
  Grid<double> img(frame.counts.width, frame.counts.height);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = static_cast<double>(frame.counts.data[i]);
  return reconstruct_from_spectrum(fft2(img, frame.pixel_size_m), method,
                                   mask_radius, ref_half_width, shape);
}

ReconstructionResult reconstruct_hologram(const Grid<double>& image,
                                          double pixel_size_m,
                                          ReconstructionMethod method,
                                          int mask_radius, int ref_half_width,
                                          MaskShape shape) {
  return reconstruct_from_spectrum(fft2(image, pixel_size_m), method,
                                   mask_radius, ref_half_width, shape);
}

double wrap_phase(double radians) {
  double w = std::remainder(radians, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double phase_region_median(const Grid<cplx>& field,
                           const Grid<std::uint8_t>& region) {
  if (!field.same_shape(region.width, region.height))
    throw DataError("field and region shapes differ");
  cplx sum(0.0, 0.0);
  std::vector<double> phases;
  for (std::size_t i = 0; i < field.data.size(); ++i) {
    if (!region.data[i]) continue;
    const cplx v = field.data[i];
    sum += v == cplx(0.0, 0.0) ? v : v / std::abs(v);
    phases.push_back(std::arg(field.data[i]));
  }
  if (phases.empty()) throw StatError("phase region holds no pixels");

  // Median of the wrapped deviations from the circular mean; immune to the
  // branch cut as long as the region phases cluster within half a turn.
  const double mean = std::arg(sum);
  std::vector<double> dev;
  dev.reserve(phases.size());
  for (const double p : phases) dev.push_back(wrap_phase(p - mean));
  std::nth_element(dev.begin(), dev.begin() + dev.size() / 2, dev.end());
  return wrap_phase(mean + dev[dev.size() / 2]);
}

}  // namespace holosim
