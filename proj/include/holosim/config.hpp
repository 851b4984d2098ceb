#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "holosim/forward_model.hpp"
#include "holosim/metrics.hpp"
#include "holosim/reconstruct.hpp"
#include "holosim/scan.hpp"
#include "holosim/source_sim.hpp"

namespace holosim {

// Plain-text run configuration: "key = value" lines grouped under
// "[section]" headers, # comments, blank lines ignored.  Every key must be
// consumed by the schema below; unknown sections or keys are hard errors so
// typos cannot silently fall back to defaults.  README documents the
// grammar and every key.
struct RawConfig {
  // section -> key -> (value, line number); top-level keys use section "".
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>>
      entries;
  std::string text;  // original bytes, for fingerprinting
};

RawConfig parse_config_text(const std::string& text);
RawConfig load_config_file(const std::string& path);

struct ObjectConfig {
  std::string kind = "half_circles";  // mirror | dark | half_circles | phase_step
  double amplitude = 1.0;
  double radius_frac = 0.35;
  double gap_frac = 0.08;
  double step_rad = 1.0;
  double cover_frac = 0.25;
};

struct BeamConfig {
  double centre_x_m = -1.0;  // negative: centre of the frame
  double centre_y_m = -1.0;
  double waist_frac = 0.3125;  // of the frame width; waist_m wins when set
  double waist_m = -1.0;
  double peak_amplitude = 1.0;
};

struct TiltCyclesConfig {
  double cycles_x = 8.5;  // fringe cycles across the frame width
  double cycles_y = 0.0;
};

struct ReconstructionConfig {
  ReconstructionMethod method = ReconstructionMethod::conjugate_multiply;
  int mask_radius = -1;  // negative: floor(min(dims)/8)
  MaskShape mask_shape = MaskShape::disk;
  int ref_half_width = 1;
  int guard_radius = -1;
};

struct MetricsConfig {
  bool neglect_dark_dark = true;
  int line_row = -1;  // negative: row through the beam centre
  int line_oversample = 1;
  double line_integration_s = 20.0;
};

// Everything a pipeline run needs.  Defaults describe the reference bench:
// 64x64 scan at 30 um pixels, 5 s dwell, 2 ns window, bench-calibrated
// count rates.
struct PipelineConfig {
  std::uint64_t seed = 1;
  double monitor_duration_s = 60.0;  // characterisation tag streams
  SourceConfig source;
  DetectorConfig herald_det{0.5, 460.0, 22e-9, 350e-12};
  DetectorConfig imaging_det{0.5, 460.0, 22e-9, 350e-12};
  DetectorConfig monitor_det{0.5, 460.0, 22e-9, 350e-12};
  double monitor_split = 0.5;
  double imaging_split = 0.5;
  ClassicalConfig classical;
  bool classical_source = false;  // simulate the classical source instead
  ScanConfig scan;
  ObjectConfig object;
  BeamConfig beam;
  TiltCyclesConfig tilt;
  RateCalibration calibration;
  ReconstructionConfig reconstruction;
  MetricsConfig metrics;
};

// Applies the schema; throws ConfigError on unknown keys, bad numbers or
// out-of-range values.
PipelineConfig pipeline_config_from(const RawConfig& raw);

// Derived pieces.
ObjectMap build_object(const ObjectConfig& cfg, const ScanConfig& scan,
                       Grid<std::uint8_t>* stepped = nullptr);
BeamProfile build_beam(const BeamConfig& cfg, const ScanConfig& scan);
TiltConfig build_tilt(const TiltCyclesConfig& cfg, const ScanConfig& scan);
FullEventSetup build_event_setup(const PipelineConfig& cfg);

}  // namespace holosim
