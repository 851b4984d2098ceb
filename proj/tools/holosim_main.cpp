#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "holosim/config.hpp"
#include "holosim/errors.hpp"
#include "holosim/io.hpp"
#include "holosim/metrics.hpp"
#include "holosim/reconstruct.hpp"
#include "holosim/scan.hpp"

namespace fs = std::filesystem;
using namespace holosim;

namespace {

PipelineConfig load_pipeline(const std::string& path, std::string& hash,
                             const std::optional<std::uint64_t>& seed) {
  const RawConfig raw = load_config_file(path);
  hash = fnv1a_hex(raw.text);
  PipelineConfig cfg = pipeline_config_from(raw);
  if (seed) cfg.seed = *seed;
  return cfg;
}

// Characterisation tag streams over monitor_duration_s.  Channel 1 is the
// herald counter; the monitor arm feeds a 50/50 splitter into channels 2
// and 3.  With the classical source enabled the same counter cascade runs
// on the classical stream instead.
struct Characterisation {
  TimeTagStream ch[4];
};

Characterisation characterise(const PipelineConfig& cfg) {
  const TimeTag dur = to_ps(cfg.monitor_duration_s);
  Rng rng_src(derive_seed(cfg.seed, 0, 101));
  Rng rng_split(derive_seed(cfg.seed, 0, 102));
  Rng rng_d1(derive_seed(cfg.seed, 0, 103));
  Rng rng_d2(derive_seed(cfg.seed, 0, 104));
  Rng rng_d3(derive_seed(cfg.seed, 0, 105));

  std::vector<TimeTag> t1, t2, t3;
  if (cfg.classical_source) {
    ClassicalConfig c = cfg.classical;
    c.duration_s = cfg.monitor_duration_s;
    const std::vector<TimeTag> src = generate_classical(c, rng_src);
    auto [arm1, arm23] = split_beam(src, 0.5, rng_split);
    auto [arm2, arm3] = split_beam(arm23, 0.5, rng_split);
    t1 = std::move(arm1);
    t2 = std::move(arm2);
    t3 = std::move(arm3);
  } else {
    SourceConfig s = cfg.source;
    s.duration_s = cfg.monitor_duration_s;
    PairStreams pairs = generate_pairs(s, rng_src);
    auto [mon, through] = split_beam(pairs.signal, cfg.monitor_split, rng_split);
    (void)through;
    auto [arm2, arm3] = split_beam(mon, 0.5, rng_split);
    t1 = std::move(pairs.herald);
    t2 = std::move(arm2);
    t3 = std::move(arm3);
  }

  Characterisation out;
  out.ch[1] = {1, dur, apply_detector(t1, dur, cfg.herald_det, rng_d1)};
  out.ch[2] = {2, dur, apply_detector(t2, dur, cfg.monitor_det, rng_d2)};
  out.ch[3] = {3, dur, apply_detector(t3, dur, cfg.monitor_det, rng_d3)};
  return out;
}

std::string join(const fs::path& dir, const std::string& name) {
  return (dir / name).string();
}

void save_stream(const fs::path& dir, const std::string& name,
                 const TimeTagStream& s, const std::string& note,
                 std::vector<std::string>& outputs) {
  const std::string path = join(dir, name);
  write_tags_binary(path, s);
  write_tags_sidecar(path, s.duration_ps, {note});
  outputs.push_back(name);
  outputs.push_back(name + ".meta.txt");
}

void save_frame(const fs::path& dir, const std::string& stem,
                const HologramFrame& frame, bool pgm,
                std::vector<std::string>& outputs) {
  write_frame_csv(join(dir, stem + ".csv"), frame);
  outputs.push_back(stem + ".csv");
  if (pgm) {
    write_frame_pgm(join(dir, stem + ".pgm"), frame);
    outputs.push_back(stem + ".pgm");
  }
}

struct SimulateOutput {
  PipelineConfig cfg;
  std::string config_hash;
  ScanResult frames;
};

SimulateOutput run_simulate(const std::string& config_path,
                            const std::string& out_dir,
                            const std::optional<std::uint64_t>& seed,
                            std::vector<std::string>& outputs,
                            bool own_manifest) {
  SimulateOutput sim;
  sim.cfg = load_pipeline(config_path, sim.config_hash, seed);
  const PipelineConfig& cfg = sim.cfg;
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  const ObjectMap object = build_object(cfg.object, cfg.scan);
  const BeamProfile beam = build_beam(cfg.beam, cfg.scan);
  const TiltConfig tilt = build_tilt(cfg.tilt, cfg.scan);
  const Grid<double> intensity = intensity_map(object, beam, tilt);

  ChannelStreams scan_streams;
  if (cfg.scan.mode == ScanMode::full_event) {
    sim.frames = acquire_full(cfg.scan, intensity, build_event_setup(cfg),
                              cfg.seed, &scan_streams);
  } else {
    sim.frames = acquire(cfg.scan, intensity, cfg.calibration, cfg.seed);
  }

  save_frame(dir, "heralded", sim.frames.heralded, true, outputs);
  save_frame(dir, "nonheralded", sim.frames.nonheralded, true, outputs);
  save_frame(dir, "triples", sim.frames.triples, false, outputs);

  const Characterisation monitor = characterise(cfg);
  for (int c = 1; c <= 3; ++c)
    save_stream(dir, "ch" + std::to_string(c) + ".bin", monitor.ch[c],
                c == 1 ? "ch1 herald" : "ch" + std::to_string(c) + " monitor",
                outputs);

  if (cfg.scan.mode == ScanMode::full_event) {
    for (int c = 1; c <= 5; ++c) {
      // Pixel dwells abut exactly, so boundary ties need the usual bump.
      finalize_tags(scan_streams.ch[c], scan_streams.duration_ps);
      const TimeTagStream s{c, scan_streams.duration_ps,
                            std::move(scan_streams.ch[c])};
      save_stream(dir, "scan_ch" + std::to_string(c) + ".bin", s,
                  "scan timeline channel " + std::to_string(c), outputs);
    }
  }

  std::printf("wrote %dx%d %s-mode frames to %s\n", cfg.scan.width,
              cfg.scan.height,
              cfg.scan.mode == ScanMode::full_event ? "full_event"
                                                    : "fast_poisson",
              out_dir.c_str());
  if (own_manifest) {
    write_manifest(join(dir, "manifest.json"), "simulate", cfg.seed,
                   sim.config_hash, outputs);
    outputs.push_back("manifest.json");
  }
  return sim;
}

RollingG2 run_g2(const std::string& dir_str, double window_ns, double bin_s,
                 bool auto_delay, std::vector<std::string>& outputs) {
  const fs::path dir(dir_str);
  const TimeTagStream h = read_tags_binary(join(dir, "ch1.bin"));
  const TimeTagStream a = read_tags_binary(join(dir, "ch2.bin"));
  const TimeTagStream b = read_tags_binary(join(dir, "ch3.bin"));
  if (window_ns < 0.0) throw ConfigError("window must be >= 0");
  if (bin_s <= 0.0) throw ConfigError("bin length must be positive");

  const TimeTag window_ps = static_cast<TimeTag>(std::llround(window_ns * 1e3));
  const TimeTag bin_ps = to_ps(bin_s);
  const TimeTag duration =
      std::max({h.duration_ps, a.duration_ps, b.duration_ps});

  TimeTag off_a = 0, off_b = 0;
  if (auto_delay) {
    const DelayEstimate ea = find_delay(h.tags, a.tags);
    const DelayEstimate eb = find_delay(h.tags, b.tags);
    if (ea.significant) off_a = ea.offset_ps;
    if (eb.significant) off_b = eb.offset_ps;
    std::printf("delay ch2: %lld ps (%s), ch3: %lld ps (%s)\n",
                static_cast<long long>(ea.offset_ps),
                ea.significant ? "significant" : "ignored",
                static_cast<long long>(eb.offset_ps),
                eb.significant ? "significant" : "ignored");
  }

  const RollingG2 roll = rolling_g2(h.tags, a.tags, b.tags, duration, bin_ps,
                                    window_ps, off_a, off_b);
  write_g2_csv(join(dir, "g2.csv"), roll.bins, &roll.combined);
  outputs.push_back("g2.csv");

  const CoincidenceCounts& n = roll.combined.counts;
  std::printf("g2(0) = %.6g +/- %.6g  (N1=%lld N12=%lld N13=%lld N123=%lld, "
              "%zu bins of %.3g s)\n",
              roll.combined.g2, roll.combined.sigma,
              static_cast<long long>(n.n1), static_cast<long long>(n.n12),
              static_cast<long long>(n.n13), static_cast<long long>(n.n123),
              roll.bins.size(), bin_s);
  int high = 0;
  for (const G2Report& r : roll.bins)
    if (r.defined && r.g2 > 0.5) ++high;
  if (roll.combined.g2 > 0.5)
    std::fprintf(stderr,
                 "warning: combined g2(0) = %.3g exceeds 0.5; the source does "
                 "not herald single photons\n",
                 roll.combined.g2);
  else if (high > 0)
    std::fprintf(stderr, "warning: %d of %zu bins exceed g2 = 0.5\n", high,
                 roll.bins.size());
  return roll;
}

ReconstructionMethod method_from(const std::string& name) {
  if (name == "conjugate_multiply") return ReconstructionMethod::conjugate_multiply;
  if (name == "recentre" || name == "recenter")
    return ReconstructionMethod::recentre;
  throw ConfigError("method must be conjugate_multiply or recentre, got '" +
                    name + "'");
}

MaskShape shape_from(const std::string& name) {
  if (name == "disk") return MaskShape::disk;
  if (name == "rect") return MaskShape::rect;
  throw ConfigError("mask shape must be disk or rect, got '" + name + "'");
}

struct ReconOptions {
  std::string method = "conjugate_multiply";
  std::string shape = "disk";
  std::string reference_path;  // object-free calibration frame, optional
  int mask_radius = -1;
  int ref_half_width = 1;
  int guard_radius = -1;
};

Spectrum frame_spectrum(const HologramFrame& frame) {
  Grid<double> img(frame.counts.width, frame.counts.height);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = static_cast<double>(frame.counts.data[i]);
  return fft2(img, frame.pixel_size_m);
}

// cal points at the spectrum of an object-free calibration frame when the
// carrier reference should come from there instead of the object frame
// (structured object phase leaks into a self-referenced block).
ReconstructionResult reconstruct_frame(const HologramFrame& frame,
                                       const ReconOptions& opt,
                                       const Spectrum* cal = nullptr) {
  const Spectrum spec = frame_spectrum(frame);

  ReconstructionResult out;
  out.order = locate_first_order(spec, opt.guard_radius);
  out.mask.centre_u = out.order.u;
  out.mask.centre_v = out.order.v;
  out.mask.radius =
      opt.mask_radius >= 0
          ? opt.mask_radius
          : default_mask_radius(spec.bins.width, spec.bins.height);
  out.mask.shape = shape_from(opt.shape);
  if (method_from(opt.method) == ReconstructionMethod::recentre) {
    out.object = reconstruct_recentred(spec, out.mask);
  } else {
    const ComplexField raw = reconstruct(isolate_order(spec, out.mask));
    const ComplexField ref = linear_phase_reference(
        cal ? *cal : spec, out.order.u, out.order.v, opt.ref_half_width);
    out.object = remove_linear_phase(raw, ref);
  }
  return out;
}

ReconstructionResult run_reconstruct(const std::string& frame_path,
                                     const std::string& out_stem,
                                     const ReconOptions& opt,
                                     std::vector<std::string>& outputs) {
  const HologramFrame frame = read_frame_csv(frame_path);
  Spectrum cal_spec;
  bool have_cal = false;
  if (!opt.reference_path.empty()) {
    if (method_from(opt.method) == ReconstructionMethod::recentre) {
      std::fprintf(stderr,
                   "warning: --reference is unused with the recentre method\n");
    } else {
      const HologramFrame cal = read_frame_csv(opt.reference_path);
      if (cal.counts.width != frame.counts.width ||
          cal.counts.height != frame.counts.height)
        throw DataError(
            "reference frame dimensions do not match the object frame");
      cal_spec = frame_spectrum(cal);
      have_cal = true;
    }
  }
  const ReconstructionResult res =
      reconstruct_frame(frame, opt, have_cal ? &cal_spec : nullptr);
  write_field(out_stem, res.object);
  for (const char* suffix :
       {"_amplitude.csv", "_phase.csv", "_amplitude.pgm", "_phase.pgm"})
    outputs.push_back(fs::path(out_stem + suffix).filename().string());
  std::printf("+1 order at (%d, %d), peak/floor %.3g, mask %s radius %d\n",
              res.order.u, res.order.v,
              res.order.peak_mag / std::max(res.order.floor_mag, 1e-300),
              opt.shape.c_str(), res.mask.radius);
  return res;
}

void print_fit(const char* label, const FitResult& fit, const FringeSnr& snr) {
  std::printf("%s: y0=%.6g a=%.6g x0=%.6g w=%.6g b=%.6g omega=%.6g phi=%.6g\n",
              label, fit.params.y0, fit.params.a, fit.params.x0, fit.params.w,
              fit.params.b, fit.params.omega, fit.params.phi);
  std::printf("%s: residual_rms=%.6g converged=%d degenerate=%d "
              "fringe_snr=%.6g%s\n",
              label, fit.residual_rms, fit.converged ? 1 : 0,
              fit.degenerate ? 1 : 0, snr.snr, snr.capped ? " (capped)" : "");
}

int run_metrics(const std::string& profile_path, const std::string& frame_path) {
  if (profile_path.empty() && frame_path.empty())
    throw ConfigError("metrics needs --profile and/or --frame");
  if (!profile_path.empty()) {
    const std::vector<std::int64_t> counts = read_profile_csv(profile_path);
    std::vector<double> y(counts.begin(), counts.end());
    const FitResult fit = fit_fringe(y);
    const FringeSnr snr = fringe_snr(fit, static_cast<int>(y.size()));
    print_fit("profile", fit, snr);
  }
  if (!frame_path.empty()) {
    const HologramFrame frame = read_frame_csv(frame_path);
    int row = 0;
    const VisibilityResult vis = frame_visibility(frame, &row);
    std::printf("frame: visibility=%.6g row=%d max=%.6g@%d min=%.6g@%d\n",
                vis.visibility, row, vis.max_value, vis.max_index,
                vis.min_value, vis.min_index);
  }
  return exit_ok;
}

int run_pipeline(const std::string& config_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed, double window_ns,
                 double bin_s, bool auto_delay) {
  std::vector<std::string> outputs;
  const SimulateOutput sim =
      run_simulate(config_path, out_dir, seed, outputs, false);
  const PipelineConfig& cfg = sim.cfg;
  const fs::path dir(out_dir);

  std::ofstream report(join(dir, "report.txt"));
  if (!report) throw DataError("cannot open report.txt for writing");
  std::ofstream metrics_csv(join(dir, "metrics.csv"));
  if (!metrics_csv) throw DataError("cannot open metrics.csv for writing");
  metrics_csv << "metric,value\n";
  char line[512];

  report << "seed: " << cfg.seed << "\n";
  report << "config fnv1a64: " << sim.config_hash << "\n";
  std::snprintf(line, sizeof(line),
                "scan: %dx%d px, %.3g m pixels, %.3g s dwell, %.3g ns window, "
                "%s mode\n",
                cfg.scan.width, cfg.scan.height, cfg.scan.pixel_size_m,
                cfg.scan.integration_s, cfg.scan.window_ns,
                cfg.scan.mode == ScanMode::full_event ? "full_event"
                                                      : "fast_poisson");
  report << line;

  // Photon statistics of the characterisation streams.
  const RollingG2 roll = run_g2(out_dir, window_ns, bin_s, auto_delay, outputs);
  const CoincidenceCounts& n = roll.combined.counts;
  std::snprintf(line, sizeof(line),
                "g2(0): %.6g +/- %.6g (N1=%lld N12=%lld N13=%lld N123=%lld)\n",
                roll.combined.g2, roll.combined.sigma,
                static_cast<long long>(n.n1), static_cast<long long>(n.n12),
                static_cast<long long>(n.n13), static_cast<long long>(n.n123));
  report << line;
  metrics_csv << "g2_combined," << roll.combined.g2 << "\n";
  metrics_csv << "g2_sigma," << roll.combined.sigma << "\n";

  // Frame visibilities.
  const HologramFrame* frames[2] = {&sim.frames.heralded,
                                    &sim.frames.nonheralded};
  const char* names[2] = {"heralded", "nonheralded"};
  for (int i = 0; i < 2; ++i) {
    try {
      int row = 0;
      const VisibilityResult vis = frame_visibility(*frames[i], &row);
      std::snprintf(line, sizeof(line), "%s visibility: %.4f (row %d)\n",
                    names[i], vis.visibility, row);
      report << line;
      metrics_csv << names[i] << "_visibility," << vis.visibility << "\n";
    } catch (const StatError& e) {
      report << names[i] << " visibility: undefined (" << e.what() << ")\n";
      metrics_csv << names[i] << "_visibility,nan\n";
    }
  }

  // Reconstructions.  A fringe-free channel legitimately has no +1 order,
  // so a StatError is reported rather than fatal.
  ReconOptions ropt;
  ropt.mask_radius = cfg.reconstruction.mask_radius;
  ropt.ref_half_width = cfg.reconstruction.ref_half_width;
  ropt.guard_radius = cfg.reconstruction.guard_radius;
  ropt.method = cfg.reconstruction.method == ReconstructionMethod::recentre
                    ? "recentre"
                    : "conjugate_multiply";
  ropt.shape =
      cfg.reconstruction.mask_shape == MaskShape::rect ? "rect" : "disk";
  for (int i = 0; i < 2; ++i) {
    try {
      const ReconstructionResult res = run_reconstruct(
          join(dir, std::string(names[i]) + ".csv"),
          join(dir, std::string(names[i]) + "_object"), ropt, outputs);
      std::snprintf(line, sizeof(line),
                    "%s reconstruction: order (%d, %d), peak/floor %.3g\n",
                    names[i], res.order.u, res.order.v,
                    res.order.peak_mag / std::max(res.order.floor_mag, 1e-300));
      report << line;
      metrics_csv << names[i] << "_order_u," << res.order.u << "\n";
      metrics_csv << names[i] << "_order_v," << res.order.v << "\n";
    } catch (const StatError& e) {
      report << names[i] << " reconstruction: no carrier order ("
             << e.what() << ")\n";
      metrics_csv << names[i] << "_order_u,nan\n";
      metrics_csv << names[i] << "_order_v,nan\n";
    }
  }

  // Long line scans through the beam row, fitted for the fringe ratio.
  const ObjectMap object = build_object(cfg.object, cfg.scan);
  const BeamProfile beam = build_beam(cfg.beam, cfg.scan);
  const TiltConfig tilt = build_tilt(cfg.tilt, cfg.scan);
  const int row = cfg.metrics.line_row >= 0 ? cfg.metrics.line_row
                                            : cfg.scan.height / 2;
  const LineChannel chans[2] = {LineChannel::heralded,
                                LineChannel::nonheralded};
  for (int i = 0; i < 2; ++i) {
    const std::vector<std::int64_t> counts = acquire_line(
        object, beam, tilt, cfg.calibration, cfg.scan, row,
        cfg.metrics.line_oversample, cfg.metrics.line_integration_s, chans[i],
        derive_seed(cfg.seed, 7, static_cast<std::uint64_t>(i)));
    const std::string profile_name = std::string(names[i]) + "_line.csv";
    write_profile_csv(join(dir, profile_name), counts,
                      cfg.metrics.line_oversample,
                      cfg.metrics.line_integration_s, names[i]);
    outputs.push_back(profile_name);
    try {
      std::vector<double> y(counts.begin(), counts.end());
      const FitResult fit = fit_fringe(y);
      const FringeSnr snr = fringe_snr(fit, static_cast<int>(y.size()));
      std::snprintf(line, sizeof(line),
                    "%s line fit: omega=%.4g b=%.4g fringe_snr=%.4g%s%s\n",
                    names[i], fit.params.omega, fit.params.b, snr.snr,
                    snr.capped ? " (capped)" : "",
                    fit.degenerate ? " (degenerate)" : "");
      report << line;
      metrics_csv << names[i] << "_fringe_snr," << snr.snr << "\n";
    } catch (const DataError& e) {
      report << names[i] << " line fit: failed (" << e.what() << ")\n";
      metrics_csv << names[i] << "_fringe_snr,nan\n";
    }
  }

  // Whole-image SNR from the calibrated mean rates.  Noise on the heralded
  // channel is the accidental herald x imaging-dark coincidence rate.
  const double window_s = cfg.scan.window_ns * 1e-9;
  SnrInputs snr_in;
  snr_in.s_heralded = cfg.calibration.s_heralded;
  const double herald_rate =
      cfg.source.pair_rate * cfg.herald_det.efficiency +
      cfg.herald_det.dark_rate;
  snr_in.n_herald_dark = herald_rate * cfg.imaging_det.dark_rate * window_s;
  snr_in.n_dark_dark =
      cfg.herald_det.dark_rate * cfg.imaging_det.dark_rate * window_s;
  snr_in.neglect_dark_dark = cfg.metrics.neglect_dark_dark;
  snr_in.s_nonheralded = cfg.calibration.s_nonheralded;
  snr_in.n_nonheralded = cfg.calibration.background;
  for (int i = 0; i < 2; ++i) {
    try {
      const double snr = snr_total(
          snr_in, i == 0 ? SnrChannel::heralded : SnrChannel::nonheralded);
      std::snprintf(line, sizeof(line), "%s whole-image snr: %.4g\n", names[i],
                    snr);
      report << line;
      metrics_csv << names[i] << "_snr_total," << snr << "\n";
    } catch (const StatError& e) {
      report << names[i] << " whole-image snr: undefined (" << e.what()
             << ")\n";
      metrics_csv << names[i] << "_snr_total,nan\n";
    }
  }

  report.flush();
  metrics_csv.flush();
  if (!report || !metrics_csv) throw DataError("short write to report files");
  outputs.push_back("report.txt");
  outputs.push_back("metrics.csv");
  write_manifest(join(dir, "manifest.json"), "pipeline", cfg.seed,
                 sim.config_hash, outputs);
  std::printf("pipeline report in %s\n", join(dir, "report.txt").c_str());
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded single-photon holography bench simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "holosim_out";
  std::optional<std::uint64_t> seed;
  double window_ns = 2.0, bin_s = 1.0;
  bool auto_delay = false;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Generate frames and characterisation tag streams");
  sim->add_option("-c,--config", config_path, "run configuration file")
      ->required();
  sim->add_option("-o,--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "override the configured seed");

  CLI::App* g2 = app.add_subcommand(
      "g2", "Heralded g2(0) from a directory of ch1/ch2/ch3 tag streams");
  g2->add_option("-d,--dir", out_dir, "directory holding ch1..ch3.bin")
      ->required();
  g2->add_option("--window-ns", window_ns, "coincidence window (ns)");
  g2->add_option("--bin-s", bin_s, "rolling bin length (s)");
  g2->add_flag("--auto-delay", auto_delay,
               "estimate and remove channel delays first");

  std::string frame_path, out_stem = "object";
  ReconOptions ropt;
  CLI::App* rec = app.add_subcommand(
      "reconstruct", "Off-axis reconstruction of a count-frame CSV");
  rec->add_option("-f,--frame", frame_path, "hologram frame CSV")->required();
  rec->add_option("-o,--out", out_stem, "output stem for amplitude/phase");
  rec->add_option("--method", ropt.method,
                  "conjugate_multiply or recentre");
  rec->add_option("--mask-radius", ropt.mask_radius,
                  "passband radius in frequency pixels (negative: default)");
  rec->add_option("--mask-shape", ropt.shape, "disk or rect");
  rec->add_option("--ref-half-width", ropt.ref_half_width,
                  "reference block half width in bins");
  rec->add_option("--reference", ropt.reference_path,
                  "object-free calibration frame CSV; its carrier replaces "
                  "the self-referenced block");
  rec->add_option("--guard-radius", ropt.guard_radius,
                  "DC guard square half width (negative: default)");

  std::string profile_path;
  CLI::App* met = app.add_subcommand(
      "metrics", "Fringe fit of a line profile and/or frame visibility");
  met->add_option("--profile", profile_path, "line profile CSV");
  met->add_option("--frame", frame_path, "count frame CSV");

  CLI::App* pipe = app.add_subcommand(
      "pipeline", "simulate + g2 + reconstruct + metrics in one run");
  pipe->add_option("-c,--config", config_path, "run configuration file")
      ->required();
  pipe->add_option("-o,--out", out_dir, "output directory");
  pipe->add_option("--seed", seed, "override the configured seed");
  pipe->add_option("--window-ns", window_ns, "coincidence window (ns)");
  pipe->add_option("--bin-s", bin_s, "rolling bin length (s)");
  pipe->add_flag("--auto-delay", auto_delay,
                 "estimate and remove channel delays first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (app.got_subcommand(sim)) {
      std::vector<std::string> outputs;
      run_simulate(config_path, out_dir, seed, outputs, true);
      return exit_ok;
    }
    if (app.got_subcommand(g2)) {
      std::vector<std::string> outputs;
      run_g2(out_dir, window_ns, bin_s, auto_delay, outputs);
      return exit_ok;
    }
    if (app.got_subcommand(rec)) {
      std::vector<std::string> outputs;
      run_reconstruct(frame_path, out_stem, ropt, outputs);
      return exit_ok;
    }
    if (app.got_subcommand(met)) return run_metrics(profile_path, frame_path);
    if (app.got_subcommand(pipe))
      return run_pipeline(config_path, out_dir, seed, window_ns, bin_s,
                          auto_delay);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return exit_config;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return exit_data;
  } catch (const StatError& e) {
    std::fprintf(stderr, "statistics error: %s\n", e.what());
    return exit_stat;
  }
  return exit_ok;
}
