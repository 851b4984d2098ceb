#pragma once

#include <cstdint>
#include <vector>

#include "holosim/timetags.hpp"

namespace holosim {

// Pairwise coincidence matching.  b is shifted by offset_ps, then tags are
// paired one-to-one inside |t_b + offset - t_a| <= window/2 (evaluated as
// 2|d| <= window so odd windows stay exact).  Pairs are taken closest
// first; ties prefer the earlier a tag, then the earlier b tag.  Each tag
// participates in at most one coincidence.  The sweep first splits both
// streams at gaps wider than half a window, which no pair can span, so the
// cost stays linear in the total tag count for realistic occupancies.
std::int64_t count_coincidences(const std::vector<TimeTag>& a,
                                const std::vector<TimeTag>& b,
                                TimeTag window_ps, TimeTag offset_ps = 0);

// Same matching; returns one flag per a tag telling whether it found a
// partner.  count_coincidences == number of set flags.
std::vector<char> match_flags(const std::vector<TimeTag>& a,
                              const std::vector<TimeTag>& b,
                              TimeTag window_ps, TimeTag offset_ps = 0);

// Heralds with a partner in both a and b under the pairwise policy above.
// Never exceeds either pairwise count.
std::int64_t count_triples(const std::vector<TimeTag>& herald,
                           const std::vector<TimeTag>& a,
                           const std::vector<TimeTag>& b, TimeTag window_ps,
                           TimeTag offset_a_ps = 0, TimeTag offset_b_ps = 0);

struct CoincidenceCounts {
  std::int64_t n1 = 0;    // herald singles
  std::int64_t n12 = 0;   // herald x first split arm
  std::int64_t n13 = 0;   // herald x second split arm
  std::int64_t n123 = 0;  // heralds matched in both arms
  double window_ns = 0.0;
};

struct G2Report {
  CoincidenceCounts counts;
  double g2 = 0.0;
  double sigma = 0.0;
  // False only for rolling bins whose counts cannot form the ratio
  // (an empty or pairwise-free bin); such bins report g2 = sigma = 0.
  bool defined = true;
};

// Heralded second-order correlation at zero delay,
//   g2 = n1 * n123 / (n12 * n13),
// with the usual independent-Poisson error propagation
//   sigma = g2 * sqrt(1/n1 + 1/n123 + 1/n12 + 1/n13).
// n123 == 0 gives g2 = 0 and the sigma that one triple would produce.
// n12 * n13 == 0 makes the ratio undefined and throws StatError.
G2Report g2_zero(const CoincidenceCounts& counts);

// Splits the run into consecutive bins of bin_ps and reports g2 per bin;
// pairs never match across a bin edge.  `combined` is g2_zero over the
// summed counts.  Bins are independent, so they may be counted in parallel.
struct RollingG2 {
  std::vector<G2Report> bins;
  G2Report combined;
  TimeTag bin_ps = 0;
};

RollingG2 rolling_g2(const std::vector<TimeTag>& herald,
                     const std::vector<TimeTag>& a,
                     const std::vector<TimeTag>& b, TimeTag duration_ps,
                     TimeTag bin_ps, TimeTag window_ps,
                     TimeTag offset_a_ps = 0, TimeTag offset_b_ps = 0);

// Serial reference for the same computation, kept for equivalence tests.
RollingG2 rolling_g2_serial(const std::vector<TimeTag>& herald,
                            const std::vector<TimeTag>& a,
                            const std::vector<TimeTag>& b, TimeTag duration_ps,
                            TimeTag bin_ps, TimeTag window_ps,
                            TimeTag offset_a_ps = 0, TimeTag offset_b_ps = 0);

// Relative delay estimation from the cross-correlation histogram of
// t_b - t_a over +-search_range_ps at bin_ps resolution.  Returns the
// offset that aligns b onto a (the negated histogram peak).  `significant`
// is false when the peak does not stand out of the accidental floor.
struct DelayEstimate {
  TimeTag offset_ps = 0;
  bool significant = false;
  std::int64_t peak_count = 0;
  double floor_mean = 0.0;
};

DelayEstimate find_delay(const std::vector<TimeTag>& a,
                         const std::vector<TimeTag>& b,
                         TimeTag search_range_ps = 100000,
                         TimeTag bin_ps = 100);

// Antisymmetric pairwise delay table for channels 1..5;
// offset(i, j) == -offset(j, i) by construction.
class DelayCalibration {
 public:
  static constexpr int kChannels = 6;

  void set(int ch_a, int ch_b, TimeTag offset_ps);
  TimeTag get(int ch_a, int ch_b) const;  // 0 when never set

 private:
  void check(int ch) const;

  TimeTag table_[kChannels][kChannels] = {};
};

}  // namespace holosim
