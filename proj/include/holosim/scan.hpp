#pragma once

#include <cstdint>
#include <vector>

#include "holosim/forward_model.hpp"
#include "holosim/grid.hpp"
#include "holosim/source_sim.hpp"

namespace holosim {

// Raster scan of the object plane, rows left to right, top row first.
// fast_poisson draws per-pixel counts straight from the rate maps;
// full_event generates time tags per pixel, routes them through the
// splitter and detector models and counts real coincidences.  Every pixel
// derives its own seed from (master seed, pixel index), so the loop can run
// in parallel with output independent of scheduling.
enum class ScanMode { fast_poisson, full_event };

struct ScanConfig {
  int width = 64;
  int height = 64;
  double pixel_size_m = 30e-6;
  double integration_s = 5.0;
  double window_ns = 2.0;
  ScanMode mode = ScanMode::fast_poisson;
};

struct ScanResult {
  HologramFrame heralded;
  HologramFrame nonheralded;
  HologramFrame triples;
};

// fast_poisson acquisition.  Triples model the accidental rate
// heralded_rate * nonheralded_rate * window at each pixel.
ScanResult acquire(const ScanConfig& scan, const Grid<double>& intensity,
                   const RateCalibration& cal, std::uint64_t seed);
ScanResult acquire_serial(const ScanConfig& scan, const Grid<double>& intensity,
                          const RateCalibration& cal, std::uint64_t seed);

// Event-level acquisition.  Per pixel: pair generation, monitor split,
// thinning by I/max(I), imaging split, detectors, coincidence counting.
struct FullEventSetup {
  SourceConfig source;          // duration_s is ignored; dwell time rules
  DetectorConfig herald_det;
  DetectorConfig imaging_det;   // applied to both imaging counters
  DetectorConfig monitor_det;   // applied to both monitor counters
  double monitor_split = 0.5;   // fraction of signal sent to the monitors
  double imaging_split = 0.5;   // first imaging counter share after the scan head
};

// Optional capture of the event streams, concatenated across pixels with
// each dwell offset to its place in the scan timeline.  Channels: 1 herald,
// 2/3 monitors, 4/5 imaging.
struct ChannelStreams {
  std::vector<TimeTag> ch[6];
  TimeTag duration_ps = 0;
};

ScanResult acquire_full(const ScanConfig& scan, const Grid<double>& intensity,
                        const FullEventSetup& setup, std::uint64_t seed,
                        ChannelStreams* streams = nullptr);
ScanResult acquire_full_serial(const ScanConfig& scan,
                               const Grid<double>& intensity,
                               const FullEventSetup& setup, std::uint64_t seed,
                               ChannelStreams* streams = nullptr);

// Rate calibration that makes fast_poisson statistically match acquire_full
// for the same optical chain (thinning and splits applied to the mean).
RateCalibration equivalent_calibration(const FullEventSetup& setup,
                                       double pair_rate);

// Single-row profile at oversample x the pixel density of the frame, for
// long line scans.  Intensity is evaluated at the oversampled positions and
// normalised by the full-frame maximum, so oversample = 1 reproduces the
// frame's pixel rates.  channel selects which rate map is sampled.
enum class LineChannel { heralded, nonheralded };

std::vector<std::int64_t> acquire_line(const ObjectMap& object,
                                       const BeamProfile& beam,
                                       const TiltConfig& tilt,
                                       const RateCalibration& cal,
                                       const ScanConfig& scan, int row,
                                       int oversample, double integration_s,
                                       LineChannel channel, std::uint64_t seed);

}  // namespace holosim
