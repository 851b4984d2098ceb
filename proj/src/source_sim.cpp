#include "holosim/source_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(what) + " must be positive");
}

void require_prob(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

// Appends t, bumped forward by 1 ps if needed to keep the stream strictly
// ascending.  Matching bumps in herald and signal keep pair tags identical.
void push_ascending(std::vector<TimeTag>& v, TimeTag t) {
  if (!v.empty() && t <= v.back()) t = v.back() + 1;
  v.push_back(t);
}

}  // namespace

PairStreams generate_pairs(const SourceConfig& cfg, Rng& rng) {
  require_finite_positive(cfg.pair_rate, "pair rate");
  require_finite_positive(cfg.duration_s, "duration");
  require_prob(cfg.multi_pair_prob, "multi-pair probability");

  PairStreams out;
  out.duration_ps = to_ps(cfg.duration_s);
  const std::size_t guess =
      static_cast<std::size_t>(cfg.pair_rate * cfg.duration_s * 1.05) + 16;
  out.herald.reserve(guess);
  out.signal.reserve(guess);

  std::exponential_distribution<double> gap(cfg.pair_rate);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= cfg.duration_s) break;
    const TimeTag tp = to_ps(t);
    push_ascending(out.herald, tp);
    push_ascending(out.signal, tp);
    if (cfg.multi_pair_prob > 0.0 && u01(rng) < cfg.multi_pair_prob)
      push_ascending(out.signal, tp + 1);
  }
  return out;
}

std::vector<TimeTag> apply_detector(const std::vector<TimeTag>& photons,
                                    TimeTag duration_ps,
                                    const DetectorConfig& cfg, Rng& rng) {
  require_prob(cfg.efficiency, "detector efficiency");
  if (cfg.dark_rate < 0.0) throw ConfigError("dark rate must be >= 0");
  if (cfg.dead_time_s < 0.0) throw ConfigError("dead time must be >= 0");
  if (cfg.jitter_sigma_s < 0.0) throw ConfigError("jitter sigma must be >= 0");
  if (duration_ps <= 0) throw ConfigError("detector duration must be positive");

  std::vector<TimeTag> tags;
  tags.reserve(photons.size() + 16);

  if (cfg.efficiency >= 1.0) {
    tags = photons;
  } else if (cfg.efficiency > 0.0) {
    std::bernoulli_distribution keep(cfg.efficiency);
    for (const TimeTag t : photons)
      if (keep(rng)) tags.push_back(t);
  }

  if (cfg.dark_rate > 0.0) {
    const double mean = cfg.dark_rate * to_seconds(duration_ps);
    std::poisson_distribution<std::int64_t> n_dark(mean);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    const std::int64_t n = n_dark(rng);
    for (std::int64_t i = 0; i < n; ++i)
      tags.push_back(static_cast<TimeTag>(pos(rng) * duration_ps));
  }

  if (cfg.jitter_sigma_s > 0.0) {
    std::normal_distribution<double> jit(0.0, to_ps(cfg.jitter_sigma_s));
    for (TimeTag& t : tags) t += std::llround(jit(rng));
  }

  finalize_tags(tags, duration_ps);

  if (cfg.dead_time_s > 0.0) {
    const TimeTag dead_ps = to_ps(cfg.dead_time_s);
    std::size_t out = 0;
    TimeTag last = std::numeric_limits<TimeTag>::min() / 2;
    for (const TimeTag t : tags) {
      if (t - last < dead_ps) continue;
      tags[out++] = t;
      last = t;
    }
    tags.resize(out);
  }
  return tags;
}

std::pair<std::vector<TimeTag>, std::vector<TimeTag>> split_beam(
    const std::vector<TimeTag>& in, double transmit_prob, Rng& rng) {
  require_prob(transmit_prob, "splitter transmission");
  std::pair<std::vector<TimeTag>, std::vector<TimeTag>> out;
  std::bernoulli_distribution transmit(transmit_prob);
  for (const TimeTag t : in) {
    if (transmit(rng)) out.first.push_back(t);
    else out.second.push_back(t);
  }
  return out;
}

namespace {

std::vector<TimeTag> poisson_stream(double rate, double duration_s, Rng& rng) {
  std::vector<TimeTag> tags;
  tags.reserve(static_cast<std::size_t>(rate * duration_s * 1.05) + 16);
  std::exponential_distribution<double> gap(rate);
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= duration_s) break;
    push_ascending(tags, to_ps(t));
  }
  return tags;
}

// Doubly stochastic stream.  The underlying field is a complex AR(1)
// process x + iy with autocorrelation exp(-dt / coherence_time), sampled on
// slots of coherence_time / 25; the instantaneous rate is
// mean_rate * (x^2 + y^2) / 2, which averages to mean_rate and gives the
// intensity correlations a short window measures as g2 > 1.
std::vector<TimeTag> thermal_stream(const ClassicalConfig& cfg, Rng& rng) {
  const double dt = cfg.coherence_time_s / 25.0;
  const double a = std::exp(-dt / cfg.coherence_time_s);
  const double s = std::sqrt(1.0 - a * a);
  const std::int64_t n_slots =
      static_cast<std::int64_t>(std::ceil(cfg.duration_s / dt));

  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);

  std::vector<TimeTag> tags;
  tags.reserve(static_cast<std::size_t>(cfg.mean_rate * cfg.duration_s * 1.3) +
               16);

  double x = unit(rng), y = unit(rng);
  std::vector<double> slot_fracs;
  for (std::int64_t k = 0; k < n_slots; ++k) {
    const double t0 = k * dt;
    const double span = std::min(dt, cfg.duration_s - t0);
    const double rate = cfg.mean_rate * 0.5 * (x * x + y * y);
    const double mean = rate * span;
    std::int64_t n = 0;
    if (mean > 0.0) {
      std::poisson_distribution<std::int64_t> draw(mean);
      n = draw(rng);
    }
    slot_fracs.clear();
    for (std::int64_t i = 0; i < n; ++i) slot_fracs.push_back(frac(rng));
    std::sort(slot_fracs.begin(), slot_fracs.end());
    for (const double f : slot_fracs)
      push_ascending(tags, to_ps(t0 + f * span));
    x = a * x + s * unit(rng);
    y = a * y + s * unit(rng);
  }
  return tags;
}

}  // namespace

std::vector<TimeTag> generate_classical(const ClassicalConfig& cfg, Rng& rng) {
  require_finite_positive(cfg.mean_rate, "mean rate");
  require_finite_positive(cfg.duration_s, "duration");
  if (cfg.kind == ClassicalKind::thermal)
    require_finite_positive(cfg.coherence_time_s, "coherence time");

  std::vector<TimeTag> tags = cfg.kind == ClassicalKind::poissonian
                                  ? poisson_stream(cfg.mean_rate, cfg.duration_s, rng)
                                  : thermal_stream(cfg, rng);
  finalize_tags(tags, to_ps(cfg.duration_s));
  return tags;
}

}  // namespace holosim
