#include "holosim/timetags.hpp"

#include <algorithm>

namespace holosim {

void finalize_tags(std::vector<TimeTag>& tags, TimeTag duration_ps) {
  std::sort(tags.begin(), tags.end());
  std::size_t out = 0;
  TimeTag prev = -1;
  for (TimeTag t : tags) {
    if (t < 0 || t > duration_ps) continue;
    if (t <= prev) t = prev + 1;
    if (t > duration_ps) continue;
    tags[out++] = t;
    prev = t;
  }
  tags.resize(out);
}

bool tags_valid(const std::vector<TimeTag>& tags, TimeTag duration_ps) {
  TimeTag prev = -1;
  for (TimeTag t : tags) {
    if (t <= prev || t < 0 || t > duration_ps) return false;
    prev = t;
  }
  return true;
}

}  // namespace holosim
