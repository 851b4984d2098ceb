#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "holosim/errors.hpp"
#include "holosim/metrics.hpp"
#include "holosim/rng.hpp"

using namespace holosim;

namespace {

std::vector<double> profile_from(const FitParams& p, int m) {
  std::vector<double> y(m);
  for (int i = 0; i < m; ++i) y[i] = eval_fringe(p, i);
  return y;
}

double wrapped(double r) {
  r = std::remainder(r, 2.0 * M_PI);
  return r;
}

}  // namespace

TEST_CASE("visibility of a three-point fringe") {
  const VisibilityResult v = visibility({1.0, 99.0, 1.0});
  CHECK(v.visibility == doctest::Approx(0.98));
  CHECK(v.max_index == 1);
  CHECK(v.min_index == 2);
  CHECK(v.max_value == 99.0);
  CHECK(v.min_value == 1.0);
}

TEST_CASE("visibility picks the maximum nearest the centroid") {
  const VisibilityResult v = visibility({10.0, 50.0, 10.0, 40.0, 10.0});
  // Centroid sits at 1.92, so the fringe at index 1 wins over index 3.
  CHECK(v.max_index == 1);
  CHECK(v.min_index == 2);
  CHECK(v.visibility == doctest::Approx(40.0 / 60.0));
}

TEST_CASE("visibility is scale invariant") {
  const std::vector<double> base = {3.0, 20.0, 5.0, 26.0, 4.0, 9.0};
  const VisibilityResult a = visibility(base);
  std::vector<double> scaled = base;
  for (double& x : scaled) x *= 137.0;
  const VisibilityResult b = visibility(scaled);
  CHECK(a.visibility == doctest::Approx(b.visibility).epsilon(1e-12));
  CHECK(a.max_index == b.max_index);
  CHECK(a.min_index == b.min_index);
}

TEST_CASE("visibility error modes") {
  CHECK_THROWS_AS(visibility({5.0, 5.0, 5.0, 5.0}), StatError);  // flat
  CHECK_THROWS_AS(visibility({1.0, 2.0, 3.0, 4.0}), StatError);  // monotone
  CHECK_THROWS_AS(visibility({1.0, 2.0}), StatError);            // too short
  CHECK_THROWS_AS(visibility({0.0, 0.0, 0.0}), StatError);       // empty
  CHECK_THROWS_AS(visibility({1.0, -2.0, 1.0}), DataError);      // negative
}

TEST_CASE("frame visibility reads the centroid row") {
  HologramFrame f;
  f.counts = Grid<std::int64_t>(5, 3);
  const std::int64_t mid[5] = {1, 99, 1, 99, 1};
  for (int x = 0; x < 5; ++x) f.counts.at(x, 1) = mid[x];
  int row = -1;
  const VisibilityResult v = frame_visibility(f, &row);
  CHECK(row == 1);
  CHECK(v.visibility == doctest::Approx(0.98));

  HologramFrame empty;
  empty.counts = Grid<std::int64_t>(5, 3);
  CHECK_THROWS_AS(frame_visibility(empty), StatError);
}

TEST_CASE("whole-image signal-to-noise arithmetic") {
  SnrInputs in;
  in.s_heralded = 1.72398;
  in.n_herald_dark = 0.109099;
  in.n_dark_dark = 0.004;
  in.s_nonheralded = 528.471;
  in.n_nonheralded = 460.0;

  CHECK(snr_total(in, SnrChannel::heralded) ==
        doctest::Approx(15.801978).epsilon(1e-6));
  CHECK(snr_total(in, SnrChannel::nonheralded) ==
        doctest::Approx(1.1488500).epsilon(1e-6));

  SnrInputs with_dd = in;
  with_dd.neglect_dark_dark = false;
  CHECK(snr_total(with_dd, SnrChannel::heralded) ==
        doctest::Approx(1.72398 / (0.109099 + 0.004)).epsilon(1e-12));

  SnrInputs col2 = in;
  col2.s_heralded = 1.84557;
  col2.n_herald_dark = 0.195998;
  CHECK(snr_total(col2, SnrChannel::heralded) ==
        doctest::Approx(9.416270).epsilon(1e-6));

  SnrInputs zero = in;
  zero.n_herald_dark = 0.0;
  CHECK_THROWS_AS(snr_total(zero, SnrChannel::heralded), StatError);
  zero = in;
  zero.n_nonheralded = 0.0;
  CHECK_THROWS_AS(snr_total(zero, SnrChannel::nonheralded), StatError);

  SnrInputs bad = in;
  bad.s_heralded = -1.0;
  CHECK_THROWS_AS(snr_total(bad, SnrChannel::heralded), ConfigError);
}

TEST_CASE("noiseless fringe fits recover every parameter") {
  FitParams truth;
  truth.y0 = 5.0;
  truth.a = 80.0;
  truth.x0 = 38.3;
  truth.w = 9.5;
  truth.b = 0.85;
  truth.omega = 0.83;
  truth.phi = 0.7;
  const std::vector<double> y = profile_from(truth, 77);

  const FitResult fit = fit_fringe(y);
  REQUIRE(fit.converged);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.residual_rms < 1e-6);
  CHECK(fit.params.y0 == doctest::Approx(truth.y0).epsilon(1e-3));
  CHECK(fit.params.a == doctest::Approx(truth.a).epsilon(1e-3));
  CHECK(fit.params.x0 == doctest::Approx(truth.x0).epsilon(1e-3));
  CHECK(fit.params.w == doctest::Approx(truth.w).epsilon(1e-3));
  CHECK(fit.params.b == doctest::Approx(truth.b).epsilon(1e-3));
  CHECK(fit.params.omega == doctest::Approx(truth.omega).epsilon(1e-3));
  CHECK(std::abs(wrapped(fit.params.phi - truth.phi)) < 1e-3);

  // Warm start straight at the answer.
  const FitResult warm = fit_fringe(y, &truth);
  CHECK(warm.converged);
  CHECK(warm.residual_rms < 1e-9);
  CHECK(warm.params.x0 == doctest::Approx(truth.x0).epsilon(1e-6));
}

TEST_CASE("fringe fits are translation covariant") {
  FitParams truth;
  truth.y0 = 12.0;
  truth.a = 60.0;
  truth.x0 = 30.0;
  truth.w = 8.0;
  truth.b = 0.7;
  truth.omega = 0.9;
  truth.phi = -0.4;
  const FitResult base = fit_fringe(profile_from(truth, 77));

  FitParams moved = truth;
  moved.x0 += 7.0;
  moved.phi -= 7.0 * truth.omega;  // same pattern shifted by 7 samples
  const FitResult shifted = fit_fringe(profile_from(moved, 77));

  REQUIRE(base.converged);
  REQUIRE(shifted.converged);
  CHECK(shifted.params.x0 == doctest::Approx(base.params.x0 + 7.0).epsilon(1e-6));
  CHECK(shifted.params.w == doctest::Approx(base.params.w).epsilon(1e-6));
  CHECK(shifted.params.omega == doctest::Approx(base.params.omega).epsilon(1e-6));
  CHECK(std::abs(wrapped(shifted.params.phi -
                         (base.params.phi - 7.0 * base.params.omega))) < 1e-5);
}

TEST_CASE("the fit reports the canonical gauge") {
  FitParams truth;
  truth.y0 = 3.0;
  truth.a = 50.0;
  truth.x0 = 40.0;
  truth.w = 11.0;
  truth.b = -0.6;  // negative modulation depth folds into the phase
  truth.omega = 0.77;
  truth.phi = 2.0;
  const std::vector<double> y = profile_from(truth, 77);
  const FitResult fit = fit_fringe(y);
  REQUIRE(fit.converged);
  CHECK(fit.params.b >= 0.0);
  CHECK(fit.params.omega >= 0.0);
  CHECK(fit.params.phi > -M_PI);
  CHECK(fit.params.phi <= M_PI);
  for (int i = 0; i < 77; ++i)
    CHECK(eval_fringe(fit.params, i) == doctest::Approx(y[i]).epsilon(1e-6));
}

TEST_CASE("envelope-only profiles are flagged degenerate") {
  FitParams truth;
  truth.y0 = 20.0;
  truth.a = 200.0;
  truth.x0 = 40.0;
  truth.w = 10.0;
  truth.b = 0.0;
  const std::vector<double> y = profile_from(truth, 77);
  const FitResult fit = fit_fringe(y);
  CHECK(fit.degenerate);
  CHECK(fit.params.a == doctest::Approx(truth.a).epsilon(1e-3));
  CHECK(fit.params.x0 == doctest::Approx(truth.x0).epsilon(1e-3));
}

TEST_CASE("fit scatter on counting noise brackets the truth") {
  // Poisson draws on a pure Gaussian envelope; the spread of many refits is
  // the yardstick for a single fit's error.
  FitParams truth;
  truth.y0 = 20.0;
  truth.a = 200.0;
  truth.x0 = 40.0;
  truth.w = 10.0;
  truth.b = 0.0;
  const std::vector<double> mean = profile_from(truth, 77);

  const int reps = 100;
  std::vector<double> y0s, as, x0s, ws;
  int converged_count = 0;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(2024, r, 0));
    std::vector<double> y(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
      std::poisson_distribution<long> d(mean[i]);
      y[i] = static_cast<double>(d(rng));
    }
    const FitResult fit = fit_fringe(y);
    if (fit.converged) ++converged_count;
    y0s.push_back(fit.params.y0);
    as.push_back(fit.params.a);
    x0s.push_back(fit.params.x0);
    ws.push_back(fit.params.w);
  }
  CHECK(converged_count >= 95);

  auto mean_sd = [](const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m += x;
    m /= v.size();
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::pair<double, double>(m, std::sqrt(s / (v.size() - 1)));
  };
  const auto [my0, sy0] = mean_sd(y0s);
  const auto [ma, sa] = mean_sd(as);
  const auto [mx0, sx0] = mean_sd(x0s);
  const auto [mw, sw] = mean_sd(ws);

  // Any single fit stays within 5 spreads; the ensemble mean much closer.
  CHECK(std::abs(y0s[0] - truth.y0) < 5.0 * sy0);
  CHECK(std::abs(as[0] - truth.a) < 5.0 * sa);
  CHECK(std::abs(x0s[0] - truth.x0) < 5.0 * sx0);
  CHECK(std::abs(ws[0] - truth.w) < 5.0 * sw);
  CHECK(std::abs(my0 - truth.y0) < sy0);
  CHECK(std::abs(ma - truth.a) < sa);
  CHECK(std::abs(mx0 - truth.x0) < sx0);
  CHECK(std::abs(mw - truth.w) < sw);
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS(fit_fringe({1, 2, 3, 4, 5, 6, 7}), DataError);  // short
  std::vector<double> bad(20, 1.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(fit_fringe(bad), DataError);
}

TEST_CASE("fitted-fringe signal-to-noise") {
  FitResult fit;
  fit.params.y0 = 0.0;
  fit.params.a = 1.0;
  fit.params.x0 = 10.0;
  fit.params.w = 5.0;
  fit.params.b = 0.5;
  fit.params.omega = 1.0;
  fit.params.phi = 0.0;
  fit.residual_rms = 0.1;

  const FringeSnr s1 = fringe_snr(fit, 21);
  CHECK_FALSE(s1.capped);
  CHECK(s1.snr > 0.0);
  fit.residual_rms = 0.2;
  const FringeSnr s2 = fringe_snr(fit, 21);
  CHECK(s1.snr == doctest::Approx(2.0 * s2.snr).epsilon(1e-12));
  CHECK(s1.signal_span == doctest::Approx(s2.signal_span).epsilon(1e-12));

  fit.residual_rms = 0.0;  // perfect fit caps the ratio
  const FringeSnr s3 = fringe_snr(fit, 21);
  CHECK(s3.capped);
  CHECK(s3.snr == 1e6);

  FitResult flat;
  flat.residual_rms = 0.0;
  const FringeSnr s4 = fringe_snr(flat, 21);
  CHECK(s4.snr == 0.0);
  CHECK_FALSE(s4.capped);

  CHECK_THROWS_AS(fringe_snr(fit, 1), ConfigError);
}

TEST_CASE("noiseless fits cap the fitted-fringe ratio") {
  FitParams truth;
  truth.y0 = 4.0;
  truth.a = 90.0;
  truth.x0 = 38.0;
  truth.w = 10.0;
  truth.b = 0.9;
  truth.omega = 0.8;
  truth.phi = 0.2;
  const FitResult fit = fit_fringe(profile_from(truth, 77));
  const FringeSnr snr = fringe_snr(fit, 77);
  CHECK(snr.capped);
  CHECK(snr.snr == 1e6);
}
