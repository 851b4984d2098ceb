#include "holosim/scan.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "holosim/coincidence.hpp"
#include "holosim/errors.hpp"
#include "holosim/rng.hpp"

namespace holosim {

namespace {

void validate_scan(const ScanConfig& scan, const Grid<double>& intensity) {
  if (scan.width < 1 || scan.height < 1)
    throw ConfigError("scan dimensions must be at least 1x1");
  if (!(scan.pixel_size_m > 0.0)) throw ConfigError("pixel size must be positive");
  if (!(scan.integration_s > 0.0))
    throw ConfigError("integration time must be positive");
  if (scan.window_ns < 0.0) throw ConfigError("coincidence window must be >= 0");
  if (!intensity.same_shape(scan.width, scan.height))
    throw DataError("intensity map does not match the scan dimensions");
}

HologramFrame blank_frame(const ScanConfig& scan, const char* channel) {
  HologramFrame f;
  f.counts = Grid<std::int64_t>(scan.width, scan.height, 0);
  f.pixel_size_m = scan.pixel_size_m;
  f.integration_s = scan.integration_s;
  f.channel = channel;
  return f;
}

std::int64_t poisson_count(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> draw(mean);
  return draw(rng);
}

ScanResult acquire_impl(const ScanConfig& scan, const Grid<double>& intensity,
                        const RateCalibration& cal, std::uint64_t seed,
                        bool parallel) {
  validate_scan(scan, intensity);
  const RateMaps rates = rate_maps(intensity, cal);
  ScanResult out{blank_frame(scan, "heralded"), blank_frame(scan, "nonheralded"),
                 blank_frame(scan, "triples")};

  const std::int64_t npx =
      static_cast<std::int64_t>(scan.width) * scan.height;
  const double t = scan.integration_s;
  const double window_s = scan.window_ns * 1e-9;

#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t p = 0; p < npx; ++p) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p), 0));
    const double rh = rates.heralded.data[p];
    const double rnh = rates.nonheralded.data[p];
    out.heralded.counts.data[p] = poisson_count(rh * t, rng);
    out.nonheralded.counts.data[p] = poisson_count(rnh * t, rng);
    out.triples.counts.data[p] = poisson_count(rh * rnh * window_s * t, rng);
  }
  return out;
}

// Everything a single full-event dwell produces.
struct PixelEvents {
  std::int64_t n12 = 0;
  std::int64_t singles = 0;
  std::int64_t n123 = 0;
  std::vector<TimeTag> ch[6];
};

PixelEvents run_pixel(const ScanConfig& scan, const FullEventSetup& setup,
                      double rel_intensity, std::uint64_t seed,
                      std::int64_t pixel, bool want_streams) {
  const std::uint64_t p = static_cast<std::uint64_t>(pixel);
  Rng rng_pairs(derive_seed(seed, p, 1));
  Rng rng_route(derive_seed(seed, p, 2));
  Rng rng_det_h(derive_seed(seed, p, 3));
  Rng rng_det_a(derive_seed(seed, p, 4));
  Rng rng_det_b(derive_seed(seed, p, 5));
  Rng rng_monitor(derive_seed(seed, p, 6));

  SourceConfig src = setup.source;
  src.duration_s = scan.integration_s;
  const TimeTag dwell_ps = to_ps(scan.integration_s);

  PairStreams pairs = generate_pairs(src, rng_pairs);
  auto [monitor_arm, interferometer] =
      split_beam(pairs.signal, setup.monitor_split, rng_route);
  auto [sampled, lost] = split_beam(interferometer, rel_intensity, rng_route);
  (void)lost;
  auto [arm_a, arm_b] = split_beam(sampled, setup.imaging_split, rng_route);

  PixelEvents ev;
  std::vector<TimeTag> det_h =
      apply_detector(pairs.herald, dwell_ps, setup.herald_det, rng_det_h);
  std::vector<TimeTag> det_a =
      apply_detector(arm_a, dwell_ps, setup.imaging_det, rng_det_a);
  std::vector<TimeTag> det_b =
      apply_detector(arm_b, dwell_ps, setup.imaging_det, rng_det_b);

  const TimeTag window_ps = std::llround(scan.window_ns * 1000.0);
  ev.n12 = count_coincidences(det_h, det_a, window_ps);
  ev.singles = static_cast<std::int64_t>(det_a.size());
  ev.n123 = count_triples(det_h, det_a, det_b, window_ps);

  if (want_streams) {
    auto [mon_a, mon_b] = split_beam(monitor_arm, 0.5, rng_monitor);
    ev.ch[1] = std::move(det_h);
    ev.ch[2] = apply_detector(mon_a, dwell_ps, setup.monitor_det, rng_monitor);
    ev.ch[3] = apply_detector(mon_b, dwell_ps, setup.monitor_det, rng_monitor);
    ev.ch[4] = std::move(det_a);
    ev.ch[5] = std::move(det_b);
  }
  return ev;
}

ScanResult acquire_full_impl(const ScanConfig& scan,
                             const Grid<double>& intensity,
                             const FullEventSetup& setup, std::uint64_t seed,
                             ChannelStreams* streams, bool parallel) {
  validate_scan(scan, intensity);
  double imax = 0.0;
  for (const double v : intensity.data) imax = std::max(imax, v);

  ScanResult out{blank_frame(scan, "heralded"), blank_frame(scan, "nonheralded"),
                 blank_frame(scan, "triples")};
  const std::int64_t npx =
      static_cast<std::int64_t>(scan.width) * scan.height;
  const bool want_streams = streams != nullptr;

  std::vector<PixelEvents> events(want_streams ? npx : 0);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t p = 0; p < npx; ++p) {
    const double rel = imax > 0.0 ? intensity.data[p] / imax : 0.0;
    PixelEvents ev = run_pixel(scan, setup, rel, seed, p, want_streams);
    out.heralded.counts.data[p] = ev.n12;
    out.nonheralded.counts.data[p] = ev.singles;
    out.triples.counts.data[p] = ev.n123;
    if (want_streams) events[p] = std::move(ev);
  }

  if (want_streams) {
    const TimeTag dwell_ps = to_ps(scan.integration_s);
    streams->duration_ps = dwell_ps * npx;
    for (int c = 1; c <= 5; ++c) streams->ch[c].clear();
    for (std::int64_t p = 0; p < npx; ++p) {
      const TimeTag base = dwell_ps * p;
      for (int c = 1; c <= 5; ++c)
        for (const TimeTag t : events[p].ch[c])
          streams->ch[c].push_back(base + t);
    }
  }
  return out;
}

}  // namespace

ScanResult acquire(const ScanConfig& scan, const Grid<double>& intensity,
                   const RateCalibration& cal, std::uint64_t seed) {
  return acquire_impl(scan, intensity, cal, seed, true);
}

ScanResult acquire_serial(const ScanConfig& scan, const Grid<double>& intensity,
                          const RateCalibration& cal, std::uint64_t seed) {
  return acquire_impl(scan, intensity, cal, seed, false);
}

ScanResult acquire_full(const ScanConfig& scan, const Grid<double>& intensity,
                        const FullEventSetup& setup, std::uint64_t seed,
                        ChannelStreams* streams) {
  return acquire_full_impl(scan, intensity, setup, seed, streams, true);
}

ScanResult acquire_full_serial(const ScanConfig& scan,
                               const Grid<double>& intensity,
                               const FullEventSetup& setup, std::uint64_t seed,
                               ChannelStreams* streams) {
  return acquire_full_impl(scan, intensity, setup, seed, streams, false);
}

RateCalibration equivalent_calibration(const FullEventSetup& setup,
                                       double pair_rate) {
  // Mean rates after the splits and detector efficiencies, valid when the
  // jitter is far smaller than the window and occupancies are low.
  RateCalibration cal;
  const double at_counter = pair_rate * (1.0 - setup.monitor_split) *
                            setup.imaging_split * setup.imaging_det.efficiency;
  cal.s_nonheralded = at_counter;
  cal.s_heralded = at_counter * setup.herald_det.efficiency;
  cal.background = setup.imaging_det.dark_rate;
  return cal;
}

std::vector<std::int64_t> acquire_line(const ObjectMap& object,
                                       const BeamProfile& beam,
                                       const TiltConfig& tilt,
                                       const RateCalibration& cal,
                                       const ScanConfig& scan, int row,
                                       int oversample, double integration_s,
                                       LineChannel channel,
                                       std::uint64_t seed) {
  if (row < 0 || row >= scan.height) throw ConfigError("line row out of range");
  if (oversample < 1) throw ConfigError("oversample must be >= 1");
  if (!(integration_s > 0.0))
    throw ConfigError("line integration time must be positive");

  const Grid<double> frame_int = intensity_map_serial(object, beam, tilt);
  double imax = 0.0;
  for (const double v : frame_int.data) imax = std::max(imax, v);
  const double inv = imax > 0.0 ? 1.0 / imax : 0.0;

  // Continuous re-evaluation of the forward model along the row, so the
  // oversampled profile is a denser sampling of the same scene.
  const double pitch = scan.pixel_size_m;
  const double py = row * pitch;
  const double dy = py - beam.centre_y_m;
  const double inv_w2 = 1.0 / (beam.waist_m * beam.waist_m);
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  const int n = scan.width * oversample;
  std::vector<std::int64_t> counts(n, 0);
  for (int k = 0; k < n; ++k) {
    const double xf = static_cast<double>(k) / oversample;
    const double px = xf * pitch;
    const int xi = std::min(scan.width - 1, static_cast<int>(xf));
    const double dx = px - beam.centre_x_m;
    const double g = beam.peak_amplitude * std::exp(-(dx * dx + dy * dy) * inv_w2);
    const double phase = kTwoPi * (tilt.fx_cpm * px + tilt.fy_cpm * py);
    const cplx ref = g * cplx(std::cos(phase), std::sin(phase));
    const cplx obj = g * object.amplitude.at(xi, row);
    const double rel = std::norm(ref + obj) * inv;
    const double rate = channel == LineChannel::heralded
                            ? cal.s_heralded * rel
                            : cal.s_nonheralded * rel + cal.background;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k),
                        1000003ull + static_cast<std::uint64_t>(row)));
    counts[k] = poisson_count(rate * integration_s, rng);
  }
  return counts;
}

}  // namespace holosim
