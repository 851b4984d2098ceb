#include "holosim/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

void require_sorted(const std::vector<TimeTag>& tags, const char* name) {
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (tags[i] <= tags[i - 1])
      throw DataError(std::string("tag stream '") + name +
                      "' is not strictly ascending");
  }
}

// One candidate pairing inside a cluster.  dist2 stores twice the absolute
// time difference so the window test 2*|d| <= window stays integer exact.
struct Candidate {
  TimeTag dist2;
  std::uint32_t ia;
  std::uint32_t ib;
};

// Greedy closest-first one-to-one matching over the index ranges
// [a0,a1) x [b0,b1).  Ties resolve to the earlier tag in a, then in b.
// Calls sink(global index into a) once per matched a tag.
template <typename Sink>
void match_cluster(const std::vector<TimeTag>& a, const std::vector<TimeTag>& b,
                   TimeTag offset, TimeTag window, std::size_t a0,
                   std::size_t a1, std::size_t b0, std::size_t b1,
                   std::vector<Candidate>& cands, Sink&& sink) {
  cands.clear();
  std::size_t jlo = b0;
  for (std::size_t i = a0; i < a1; ++i) {
    const TimeTag ta = a[i];
    while (jlo < b1 && 2 * (ta - (b[jlo] + offset)) > window) ++jlo;
    for (std::size_t j = jlo; j < b1; ++j) {
      const TimeTag d = b[j] + offset - ta;
      if (2 * d > window) break;
      cands.push_back({2 * std::abs(d), static_cast<std::uint32_t>(i - a0),
                       static_cast<std::uint32_t>(j - b0)});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.dist2 != y.dist2) return x.dist2 < y.dist2;
    if (x.ia != y.ia) return x.ia < y.ia;
    return x.ib < y.ib;
  });
  std::vector<char> used_a(a1 - a0, 0), used_b(b1 - b0, 0);
  for (const Candidate& c : cands) {
    if (used_a[c.ia] || used_b[c.ib]) continue;
    used_a[c.ia] = 1;
    used_b[c.ib] = 1;
    sink(a0 + c.ia);
  }
}

// Runs greedy matching over both streams.  The streams are cut into clusters
// wherever the merged timeline has a gap g with 2*g > window: no candidate
// pair can span such a gap, and transitively no matching decision can cross
// it either, so per-cluster matching reproduces the global greedy result.
template <typename Sink>
void greedy_match(const std::vector<TimeTag>& a, const std::vector<TimeTag>& b,
                  TimeTag window_ps, TimeTag offset_ps, Sink&& sink) {
  if (window_ps < 0) throw ConfigError("coincidence window must be >= 0");
  require_sorted(a, "a");
  require_sorted(b, "b");

  std::vector<Candidate> cands;
  const TimeTag inf = std::numeric_limits<TimeTag>::max();
  std::size_t ia = 0, ib = 0;
  std::size_t ca = 0, cb = 0;  // cluster start indices
  bool have_prev = false;
  TimeTag prev = 0;
  while (ia < a.size() || ib < b.size()) {
    const TimeTag ta = ia < a.size() ? a[ia] : inf;
    const TimeTag tb = ib < b.size() ? b[ib] + offset_ps : inf;
    const TimeTag t = std::min(ta, tb);
    if (have_prev && 2 * (t - prev) > window_ps) {
      if (ia > ca && ib > cb)
        match_cluster(a, b, offset_ps, window_ps, ca, ia, cb, ib, cands, sink);
      ca = ia;
      cb = ib;
    }
    if (ta <= tb) ++ia; else ++ib;
    prev = t;
    have_prev = true;
  }
  if (ia > ca && ib > cb)
    match_cluster(a, b, offset_ps, window_ps, ca, ia, cb, ib, cands, sink);
}

}  // namespace

std::int64_t count_coincidences(const std::vector<TimeTag>& a,
                                const std::vector<TimeTag>& b,
                                TimeTag window_ps, TimeTag offset_ps) {
  std::int64_t n = 0;
  greedy_match(a, b, window_ps, offset_ps, [&](std::size_t) { ++n; });
  return n;
}

std::vector<char> match_flags(const std::vector<TimeTag>& a,
                              const std::vector<TimeTag>& b, TimeTag window_ps,
                              TimeTag offset_ps) {
  std::vector<char> flags(a.size(), 0);
  greedy_match(a, b, window_ps, offset_ps, [&](std::size_t i) { flags[i] = 1; });
  return flags;
}

std::int64_t count_triples(const std::vector<TimeTag>& herald,
                           const std::vector<TimeTag>& a,
                           const std::vector<TimeTag>& b, TimeTag window_ps,
                           TimeTag offset_a_ps, TimeTag offset_b_ps) {
  const std::vector<char> fa = match_flags(herald, a, window_ps, offset_a_ps);
  const std::vector<char> fb = match_flags(herald, b, window_ps, offset_b_ps);
  std::int64_t n = 0;
  for (std::size_t i = 0; i < herald.size(); ++i)
    if (fa[i] && fb[i]) ++n;
  return n;
}

G2Report g2_zero(const CoincidenceCounts& counts) {
  const std::int64_t floor12 = std::min(counts.n12, counts.n13);
  if (counts.n123 > floor12)
    throw DataError("triple coincidences exceed a pairwise count");
  if (counts.n1 <= 0 || counts.n12 <= 0 || counts.n13 <= 0)
    throw StatError("zero-delay correlation undefined: empty singles or "
                    "pairwise coincidence counts");
  G2Report r;
  r.counts = counts;
  const double n1 = static_cast<double>(counts.n1);
  const double n12 = static_cast<double>(counts.n12);
  const double n13 = static_cast<double>(counts.n13);
  if (counts.n123 == 0) {
    // Upper-bound style report: the value is zero and the uncertainty is
    // what a single triple would have produced.
    r.g2 = 0.0;
    const double g1 = n1 / (n12 * n13);
    r.sigma = g1 * std::sqrt(1.0 / n1 + 1.0 + 1.0 / n12 + 1.0 / n13);
  } else {
    const double n123 = static_cast<double>(counts.n123);
    r.g2 = n1 * n123 / (n12 * n13);
    r.sigma = r.g2 *
              std::sqrt(1.0 / n1 + 1.0 / n123 + 1.0 / n12 + 1.0 / n13);
  }
  return r;
}

namespace {

// Shared by the parallel and serial rolling variants.  Bins partition each
// stream by raw tag value; pairs that would straddle a bin edge are not
// counted, which biases each bin by at most window/bin relative terms.
RollingG2 rolling_impl(const std::vector<TimeTag>& herald,
                       const std::vector<TimeTag>& a,
                       const std::vector<TimeTag>& b, TimeTag duration_ps,
                       TimeTag bin_ps, TimeTag window_ps, TimeTag offset_a_ps,
                       TimeTag offset_b_ps, bool parallel) {
  if (bin_ps <= 0) throw ConfigError("rolling bin width must be positive");
  if (duration_ps <= 0) throw ConfigError("rolling duration must be positive");
  const std::int64_t nbins = (duration_ps + bin_ps - 1) / bin_ps;

  auto edges = [&](const std::vector<TimeTag>& s) {
    std::vector<std::size_t> e(nbins + 1, 0);
    std::size_t i = 0;
    for (std::int64_t k = 0; k < nbins; ++k) {
      const TimeTag hi = (k + 1) * bin_ps;
      while (i < s.size() && s[i] < hi) ++i;
      e[k + 1] = i;
    }
    e[nbins] = s.size();
    return e;
  };
  const std::vector<std::size_t> eh = edges(herald), ea = edges(a), eb = edges(b);

  std::vector<CoincidenceCounts> bins(nbins);
  const double window_ns = static_cast<double>(window_ps) / 1000.0;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t k = 0; k < nbins; ++k) {
    const std::vector<TimeTag> h(herald.begin() + eh[k], herald.begin() + eh[k + 1]);
    const std::vector<TimeTag> sa(a.begin() + ea[k], a.begin() + ea[k + 1]);
    const std::vector<TimeTag> sb(b.begin() + eb[k], b.begin() + eb[k + 1]);
    CoincidenceCounts c;
    c.n1 = static_cast<std::int64_t>(h.size());
    c.n12 = count_coincidences(h, sa, window_ps, offset_a_ps);
    c.n13 = count_coincidences(h, sb, window_ps, offset_b_ps);
    c.n123 = count_triples(h, sa, sb, window_ps, offset_a_ps, offset_b_ps);
    c.window_ns = window_ns;
    bins[k] = c;
  }

  RollingG2 out;
  out.bin_ps = bin_ps;
  out.bins.reserve(nbins);
  CoincidenceCounts total;
  total.window_ns = window_ns;
  for (const CoincidenceCounts& c : bins) {
    total.n1 += c.n1;
    total.n12 += c.n12;
    total.n13 += c.n13;
    total.n123 += c.n123;
    G2Report r;
    r.counts = c;
    try {
      r = g2_zero(c);
    } catch (const StatError&) {
      r.defined = false;
      r.g2 = 0.0;
      r.sigma = 0.0;
    }
    out.bins.push_back(r);
  }
  out.combined = g2_zero(total);
  return out;
}

}  // namespace

RollingG2 rolling_g2(const std::vector<TimeTag>& herald,
                     const std::vector<TimeTag>& a,
                     const std::vector<TimeTag>& b, TimeTag duration_ps,
                     TimeTag bin_ps, TimeTag window_ps, TimeTag offset_a_ps,
                     TimeTag offset_b_ps) {
  return rolling_impl(herald, a, b, duration_ps, bin_ps, window_ps,
                      offset_a_ps, offset_b_ps, true);
}

RollingG2 rolling_g2_serial(const std::vector<TimeTag>& herald,
                            const std::vector<TimeTag>& a,
                            const std::vector<TimeTag>& b, TimeTag duration_ps,
                            TimeTag bin_ps, TimeTag window_ps,
                            TimeTag offset_a_ps, TimeTag offset_b_ps) {
  return rolling_impl(herald, a, b, duration_ps, bin_ps, window_ps,
                      offset_a_ps, offset_b_ps, false);
}

DelayEstimate find_delay(const std::vector<TimeTag>& a,
                         const std::vector<TimeTag>& b,
                         TimeTag search_range_ps, TimeTag bin_ps) {
  if (search_range_ps <= 0 || bin_ps <= 0)
    throw ConfigError("delay search range and bin width must be positive");
  require_sorted(a, "a");
  require_sorted(b, "b");

  const std::int64_t nbins = 2 * (search_range_ps / bin_ps) + 1;
  const TimeTag lo = -((nbins * bin_ps) / 2);
  std::vector<std::int64_t> hist(nbins, 0);

  auto bin_of = [&](TimeTag d) -> std::int64_t {
    const TimeTag rel = d - lo;
    if (rel < 0 || rel >= nbins * bin_ps) return -1;
    return rel / bin_ps;
  };

  std::size_t jlo = 0;
  for (const TimeTag ta : a) {
    while (jlo < b.size() && b[jlo] < ta + lo) ++jlo;
    for (std::size_t j = jlo; j < b.size(); ++j) {
      const TimeTag d = b[j] - ta;
      if (d >= lo + nbins * bin_ps) break;
      const std::int64_t k = bin_of(d);
      if (k >= 0) ++hist[k];
    }
  }

  DelayEstimate est;
  std::int64_t peak_bin = 0;
  for (std::int64_t k = 1; k < nbins; ++k)
    if (hist[k] > hist[peak_bin]) peak_bin = k;
  est.peak_count = hist[peak_bin];

  std::int64_t rest = 0;
  for (std::int64_t k = 0; k < nbins; ++k)
    if (k != peak_bin) rest += hist[k];
  est.floor_mean = nbins > 1 ? static_cast<double>(rest) / (nbins - 1) : 0.0;
  est.significant = est.peak_count >= 5 &&
                    static_cast<double>(est.peak_count) >
                        est.floor_mean + 5.0 * std::sqrt(est.floor_mean + 1.0);

  // The returned offset is the negated median of the differences inside the
  // peak bin, so a rigid shift between copies of a stream comes back exact.
  if (est.peak_count > 0) {
    std::vector<TimeTag> ds;
    ds.reserve(static_cast<std::size_t>(est.peak_count));
    jlo = 0;
    for (const TimeTag ta : a) {
      while (jlo < b.size() && b[jlo] < ta + lo) ++jlo;
      for (std::size_t j = jlo; j < b.size(); ++j) {
        const TimeTag d = b[j] - ta;
        if (d >= lo + nbins * bin_ps) break;
        if (bin_of(d) == peak_bin) ds.push_back(d);
      }
    }
    std::nth_element(ds.begin(), ds.begin() + ds.size() / 2, ds.end());
    est.offset_ps = -ds[ds.size() / 2];
  }
  return est;
}

void DelayCalibration::set(int ch_a, int ch_b, TimeTag offset_ps) {
  check(ch_a);
  check(ch_b);
  table_[ch_a][ch_b] = offset_ps;
  table_[ch_b][ch_a] = -offset_ps;
}

TimeTag DelayCalibration::get(int ch_a, int ch_b) const {
  check(ch_a);
  check(ch_b);
  return table_[ch_a][ch_b];
}

void DelayCalibration::check(int ch) const {
  if (ch < 0 || ch >= kChannels)
    throw ConfigError("delay calibration channel out of range");
}

}  // namespace holosim
