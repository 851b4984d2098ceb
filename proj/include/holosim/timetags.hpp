#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace holosim {

// All timestamps are integer picoseconds from the start of a run.  Integer
// time keeps coincidence windows exact and makes runs reproducible to the
// bit; at typical nanosecond windows a picosecond grid is far below every
// physical timescale in the chain.
using TimeTag = std::int64_t;

constexpr double kPicosPerSecond = 1e12;

inline TimeTag to_ps(double seconds) {
  return static_cast<TimeTag>(std::llround(seconds * kPicosPerSecond));
}

inline double to_seconds(TimeTag ps) {
  return static_cast<double>(ps) / kPicosPerSecond;
}

// One detector channel worth of tags.  Channels follow the detector labels
// of the five-counter bench layout: 1 herald, 2/3 monitor pair, 4/5 imaging
// pair.  `tags` is strictly ascending and every tag lies in [0, duration].
struct TimeTagStream {
  int channel = 0;
  TimeTag duration_ps = 0;
  std::vector<TimeTag> tags;
};

// Sorts `tags`, drops entries outside [0, duration_ps] and bumps exact ties
// forward one picosecond so the strictly-ascending invariant holds.  A bump
// that would land past the end of the run is dropped instead.
void finalize_tags(std::vector<TimeTag>& tags, TimeTag duration_ps);

// True when strictly ascending and within [0, duration_ps].
bool tags_valid(const std::vector<TimeTag>& tags, TimeTag duration_ps);

}  // namespace holosim
