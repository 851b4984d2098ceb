#pragma once

#include <utility>
#include <vector>

#include "holosim/rng.hpp"
#include "holosim/timetags.hpp"

namespace holosim {

// Photon-pair source.  Emissions form a homogeneous Poisson process; every
// emission puts one tag in the herald stream and one in the signal stream
// at the same instant.  With probability multi_pair_prob an emission
// carries a second, independent signal photon in the same slot, which is
// what a heralded g2 measurement ultimately detects.
struct SourceConfig {
  double pair_rate = 1e5;       // emissions per second
  double multi_pair_prob = 0.0; // chance of an extra signal photon per emission
  double duration_s = 1.0;
};

struct PairStreams {
  std::vector<TimeTag> herald;
  std::vector<TimeTag> signal;
  TimeTag duration_ps = 0;
};

PairStreams generate_pairs(const SourceConfig& cfg, Rng& rng);

// Single-photon counter imperfections, applied in this order: efficiency
// thinning, dark-count merge, timing jitter on every tag, one dead-time
// pass over the re-sorted result.  Dead time runs after the dark merge so
// darks can shadow real tags the way a real counter behaves.
struct DetectorConfig {
  double efficiency = 0.5;
  double dark_rate = 460.0;       // counts per second
  double dead_time_s = 22e-9;
  double jitter_sigma_s = 350e-12;
};

std::vector<TimeTag> apply_detector(const std::vector<TimeTag>& photons,
                                    TimeTag duration_ps,
                                    const DetectorConfig& cfg, Rng& rng);

// Non-polarising beam splitter: each tag goes to exactly one output, the
// first with probability transmit_prob.  Outputs are disjoint and their
// union is the input.
std::pair<std::vector<TimeTag>, std::vector<TimeTag>> split_beam(
    const std::vector<TimeTag>& in, double transmit_prob, Rng& rng);

// Classical comparison sources.  `poissonian` is a homogeneous Poisson
// stream.  `thermal` draws an exponentially correlated intensity (complex
// Gaussian field squared, correlation time coherence_time_s) and emits a
// doubly stochastic Poisson stream from it, so coincidence windows much
// shorter than the coherence time see photon bunching.
enum class ClassicalKind { poissonian, thermal };

struct ClassicalConfig {
  ClassicalKind kind = ClassicalKind::poissonian;
  double mean_rate = 1e5;        // photons per second
  double coherence_time_s = 5e-5;
  double duration_s = 1.0;
};

std::vector<TimeTag> generate_classical(const ClassicalConfig& cfg, Rng& rng);

}  // namespace holosim
