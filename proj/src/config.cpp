#include "holosim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

}  // namespace

RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  raw.text = text;
  std::istringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(lineno, "empty section name");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");
    if (value.empty()) fail(lineno, "missing value for '" + key + "'");
    auto& sec = raw.entries[section];
    if (sec.count(key))
      fail(lineno, "duplicate key '" + key + "' in section [" + section + "]");
    sec[key] = {value, lineno};
  }
  return raw;
}

RawConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

// Typed access that tracks which keys the schema touched, so leftovers can
// be reported as unknown-key errors with their line numbers.
class Schema {
 public:
  explicit Schema(const RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& sec, const std::string& key) {
    const auto s = raw_.entries.find(sec);
    return s != raw_.entries.end() && s->second.count(key);
  }

  double number(const std::string& sec, const std::string& key, double dflt) {
    const auto* e = fetch(sec, key);
    if (!e) return dflt;
    try {
      std::size_t used = 0;
      const double v = std::stod(e->first, &used);
      if (used != e->first.size()) throw std::invalid_argument(e->first);
      return v;
    } catch (const std::exception&) {
      fail(e->second, "'" + key + "' is not a number: '" + e->first + "'");
    }
  }

  std::int64_t integer(const std::string& sec, const std::string& key,
                       std::int64_t dflt) {
    const auto* e = fetch(sec, key);
    if (!e) return dflt;
    std::int64_t v = 0;
    const auto res =
        std::from_chars(e->first.data(), e->first.data() + e->first.size(), v);
    if (res.ec != std::errc() || res.ptr != e->first.data() + e->first.size())
      fail(e->second, "'" + key + "' is not an integer: '" + e->first + "'");
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& sec, const std::string& key,
                                 std::uint64_t dflt) {
    const auto* e = fetch(sec, key);
    if (!e) return dflt;
    std::uint64_t v = 0;
    const auto res =
        std::from_chars(e->first.data(), e->first.data() + e->first.size(), v);
    if (res.ec != std::errc() || res.ptr != e->first.data() + e->first.size())
      fail(e->second, "'" + key + "' is not an unsigned integer: '" + e->first + "'");
    return v;
  }

  bool boolean(const std::string& sec, const std::string& key, bool dflt) {
    const auto* e = fetch(sec, key);
    if (!e) return dflt;
    std::string v = e->first;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(e->second, "'" + key + "' is not a boolean: '" + e->first + "'");
  }

  std::string word(const std::string& sec, const std::string& key,
                   const std::string& dflt) {
    const auto* e = fetch(sec, key);
    return e ? e->first : dflt;
  }

  int line_of(const std::string& sec, const std::string& key) {
    const auto s = raw_.entries.find(sec);
    if (s == raw_.entries.end()) return 0;
    const auto k = s->second.find(key);
    return k == s->second.end() ? 0 : k->second.second;
  }

  void finish() const {
    for (const auto& [sec, keys] : raw_.entries)
      for (const auto& [key, entry] : keys)
        if (!consumed_.count({sec, key}))
          fail(entry.second, "unknown key '" + key + "' in section [" + sec + "]");
  }

 private:
  const std::pair<std::string, int>* fetch(const std::string& sec,
                                           const std::string& key) {
    consumed_.insert({sec, key});
    const auto s = raw_.entries.find(sec);
    if (s == raw_.entries.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  const RawConfig& raw_;
  std::set<std::pair<std::string, std::string>> consumed_;
};

DetectorConfig read_detector(Schema& s, const std::string& sec,
                             const DetectorConfig& dflt) {
  DetectorConfig d;
  d.efficiency = s.number(sec, "efficiency", dflt.efficiency);
  d.dark_rate = s.number(sec, "dark_rate", dflt.dark_rate);
  d.dead_time_s = s.number(sec, "dead_time_s", dflt.dead_time_s);
  d.jitter_sigma_s = s.number(sec, "jitter_sigma_s", dflt.jitter_sigma_s);
  return d;
}

[[noreturn]] void bad_choice(Schema& s, const std::string& sec,
                             const std::string& key, const std::string& got,
                             const std::string& allowed) {
  fail(s.line_of(sec, key),
       "'" + key + "' must be one of " + allowed + ", got '" + got + "'");
}

}  // namespace

PipelineConfig pipeline_config_from(const RawConfig& raw) {
  Schema s(raw);
  PipelineConfig cfg;

  cfg.seed = s.unsigned_integer("run", "seed", cfg.seed);
  cfg.monitor_duration_s =
      s.number("run", "monitor_duration_s", cfg.monitor_duration_s);

  cfg.source.pair_rate = s.number("source", "pair_rate", cfg.source.pair_rate);
  cfg.source.multi_pair_prob =
      s.number("source", "multi_pair_prob", cfg.source.multi_pair_prob);

  cfg.herald_det = read_detector(s, "detector.herald", cfg.herald_det);
  cfg.imaging_det = read_detector(s, "detector.imaging", cfg.imaging_det);
  cfg.monitor_det = read_detector(s, "detector.monitor", cfg.monitor_det);

  cfg.monitor_split = s.number("splitters", "monitor_split", cfg.monitor_split);
  cfg.imaging_split = s.number("splitters", "imaging_split", cfg.imaging_split);

  cfg.classical_source = s.boolean("classical", "enabled", cfg.classical_source);
  const std::string kind =
      s.word("classical", "kind", "poissonian");
  if (kind == "poissonian") cfg.classical.kind = ClassicalKind::poissonian;
  else if (kind == "thermal") cfg.classical.kind = ClassicalKind::thermal;
  else bad_choice(s, "classical", "kind", kind, "poissonian|thermal");
  cfg.classical.mean_rate =
      s.number("classical", "mean_rate", cfg.classical.mean_rate);
  cfg.classical.coherence_time_s =
      s.number("classical", "coherence_time_s", cfg.classical.coherence_time_s);

  cfg.scan.width = static_cast<int>(s.integer("scan", "width", cfg.scan.width));
  cfg.scan.height = static_cast<int>(s.integer("scan", "height", cfg.scan.height));
  cfg.scan.pixel_size_m = s.number("scan", "pixel_size_m", cfg.scan.pixel_size_m);
  cfg.scan.integration_s = s.number("scan", "integration_s", cfg.scan.integration_s);
  cfg.scan.window_ns = s.number("scan", "window_ns", cfg.scan.window_ns);
  const std::string mode = s.word("scan", "mode", "fast_poisson");
  if (mode == "fast_poisson") cfg.scan.mode = ScanMode::fast_poisson;
  else if (mode == "full_event") cfg.scan.mode = ScanMode::full_event;
  else bad_choice(s, "scan", "mode", mode, "fast_poisson|full_event");

  cfg.object.kind = s.word("object", "kind", cfg.object.kind);
  if (cfg.object.kind != "mirror" && cfg.object.kind != "dark" &&
      cfg.object.kind != "half_circles" && cfg.object.kind != "phase_step")
    bad_choice(s, "object", "kind", cfg.object.kind,
               "mirror|dark|half_circles|phase_step");
  cfg.object.amplitude = s.number("object", "amplitude", cfg.object.amplitude);
  cfg.object.radius_frac = s.number("object", "radius_frac", cfg.object.radius_frac);
  cfg.object.gap_frac = s.number("object", "gap_frac", cfg.object.gap_frac);
  cfg.object.step_rad = s.number("object", "step_rad", cfg.object.step_rad);
  cfg.object.cover_frac = s.number("object", "cover_frac", cfg.object.cover_frac);

  cfg.beam.centre_x_m = s.number("beam", "centre_x_m", cfg.beam.centre_x_m);
  cfg.beam.centre_y_m = s.number("beam", "centre_y_m", cfg.beam.centre_y_m);
  cfg.beam.waist_frac = s.number("beam", "waist_frac", cfg.beam.waist_frac);
  cfg.beam.waist_m = s.number("beam", "waist_m", cfg.beam.waist_m);
  cfg.beam.peak_amplitude =
      s.number("beam", "peak_amplitude", cfg.beam.peak_amplitude);

  cfg.tilt.cycles_x = s.number("tilt", "cycles_x", cfg.tilt.cycles_x);
  cfg.tilt.cycles_y = s.number("tilt", "cycles_y", cfg.tilt.cycles_y);

  cfg.calibration.s_heralded =
      s.number("calibration", "s_heralded", cfg.calibration.s_heralded);
  cfg.calibration.s_nonheralded =
      s.number("calibration", "s_nonheralded", cfg.calibration.s_nonheralded);
  cfg.calibration.background =
      s.number("calibration", "background", cfg.calibration.background);

  const std::string method =
      s.word("reconstruction", "method", "conjugate_multiply");
  if (method == "conjugate_multiply")
    cfg.reconstruction.method = ReconstructionMethod::conjugate_multiply;
  else if (method == "recentre" || method == "recenter")
    cfg.reconstruction.method = ReconstructionMethod::recentre;
  else
    bad_choice(s, "reconstruction", "method", method,
               "conjugate_multiply|recentre");
  cfg.reconstruction.mask_radius = static_cast<int>(
      s.integer("reconstruction", "mask_radius", cfg.reconstruction.mask_radius));
  const std::string shape = s.word("reconstruction", "mask_shape", "disk");
  if (shape == "disk") cfg.reconstruction.mask_shape = MaskShape::disk;
  else if (shape == "rect") cfg.reconstruction.mask_shape = MaskShape::rect;
  else bad_choice(s, "reconstruction", "mask_shape", shape, "disk|rect");
  cfg.reconstruction.ref_half_width = static_cast<int>(s.integer(
      "reconstruction", "ref_half_width", cfg.reconstruction.ref_half_width));
  cfg.reconstruction.guard_radius = static_cast<int>(s.integer(
      "reconstruction", "guard_radius", cfg.reconstruction.guard_radius));

  cfg.metrics.neglect_dark_dark =
      s.boolean("metrics", "neglect_dark_dark", cfg.metrics.neglect_dark_dark);
  cfg.metrics.line_row =
      static_cast<int>(s.integer("metrics", "line_row", cfg.metrics.line_row));
  cfg.metrics.line_oversample = static_cast<int>(
      s.integer("metrics", "line_oversample", cfg.metrics.line_oversample));
  cfg.metrics.line_integration_s =
      s.number("metrics", "line_integration_s", cfg.metrics.line_integration_s);

  s.finish();

  // Range checks that do not depend on later derived values.
  if (cfg.monitor_duration_s <= 0.0)
    throw ConfigError("monitor_duration_s must be positive");
  if (cfg.scan.width < 1 || cfg.scan.height < 1)
    throw ConfigError("scan dimensions must be at least 1x1");
  if (cfg.metrics.line_oversample < 1)
    throw ConfigError("line_oversample must be >= 1");
  return cfg;
}

ObjectMap build_object(const ObjectConfig& cfg, const ScanConfig& scan,
                       Grid<std::uint8_t>* stepped) {
  if (stepped) *stepped = Grid<std::uint8_t>(scan.width, scan.height, 0);
  if (cfg.kind == "mirror")
    return make_mirror(scan.width, scan.height, scan.pixel_size_m);
  if (cfg.kind == "dark")
    return make_flat(scan.width, scan.height, scan.pixel_size_m, 0.0);
  if (cfg.kind == "half_circles")
    return make_half_circles(scan.width, scan.height, scan.pixel_size_m,
                             cfg.radius_frac, cfg.gap_frac, cfg.amplitude);
  if (cfg.kind == "phase_step") {
    PhaseStepObject o = make_phase_step(scan.width, scan.height,
                                        scan.pixel_size_m, cfg.step_rad,
                                        cfg.cover_frac);
    if (stepped) *stepped = o.stepped;
    return o.map;
  }
  throw ConfigError("unknown object kind '" + cfg.kind + "'");
}

BeamProfile build_beam(const BeamConfig& cfg, const ScanConfig& scan) {
  BeamProfile b = centred_beam(scan.width, scan.height, scan.pixel_size_m,
                               cfg.waist_frac, cfg.peak_amplitude);
  if (cfg.centre_x_m >= 0.0) b.centre_x_m = cfg.centre_x_m;
  if (cfg.centre_y_m >= 0.0) b.centre_y_m = cfg.centre_y_m;
  if (cfg.waist_m > 0.0) b.waist_m = cfg.waist_m;
  return b;
}

TiltConfig build_tilt(const TiltCyclesConfig& cfg, const ScanConfig& scan) {
  return tilt_from_cycles(scan.width, scan.height, scan.pixel_size_m,
                          cfg.cycles_x, cfg.cycles_y);
}

FullEventSetup build_event_setup(const PipelineConfig& cfg) {
  FullEventSetup setup;
  setup.source = cfg.source;
  setup.herald_det = cfg.herald_det;
  setup.imaging_det = cfg.imaging_det;
  setup.monitor_det = cfg.monitor_det;
  setup.monitor_split = cfg.monitor_split;
  setup.imaging_split = cfg.imaging_split;
  return setup;
}

}  // namespace holosim
