#include "holosim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 2.0 * kPi;

bool is_local_max(const std::vector<double>& p, int i) {
  return i > 0 && i + 1 < static_cast<int>(p.size()) && p[i] > p[i - 1] &&
         p[i] >= p[i + 1];
}

bool is_local_min(const std::vector<double>& p, int i) {
  const int m = static_cast<int>(p.size());
  if (i <= 0 || i >= m) return false;
  if (i == m - 1) return p[i] <= p[i - 1];
  return p[i] <= p[i - 1] && p[i] <= p[i + 1];
}

}  // namespace

VisibilityResult visibility(const std::vector<double>& profile) {
  const int m = static_cast<int>(profile.size());
  if (m < 3) throw StatError("profile too short for a fringe");

  double total = 0.0, weighted = 0.0;
  for (int i = 0; i < m; ++i) {
    if (profile[i] < 0.0) throw DataError("negative count in profile");
    total += profile[i];
    weighted += i * profile[i];
  }
  if (total <= 0.0) throw StatError("profile holds no counts");
  const double centroid = weighted / total;

  VisibilityResult best;
  bool found = false;
  double best_dist = std::numeric_limits<double>::max();
  for (int i = 1; i + 1 < m; ++i) {
    if (!is_local_max(profile, i)) continue;
    int j = i + 1;
    while (j < m && !is_local_min(profile, j)) ++j;
    if (j >= m) continue;
    const double dist = std::abs(i - centroid);
    if (dist < best_dist) {
      best_dist = dist;
      best.max_index = i;
      best.min_index = j;
      best.max_value = profile[i];
      best.min_value = profile[j];
      found = true;
    }
  }
  if (!found) throw StatError("no fringe maximum in profile");

  const double denom = best.max_value + best.min_value;
  if (denom <= 0.0) throw StatError("fringe extrema hold no counts");
  best.visibility = (best.max_value - best.min_value) / denom;
  return best;
}

VisibilityResult frame_visibility(const HologramFrame& frame, int* row_out) {
  const int w = frame.counts.width, h = frame.counts.height;
  if (w < 3 || h < 1) throw StatError("frame too small for a fringe");

  double total = 0.0, weighted = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = static_cast<double>(frame.counts.at(x, y));
      total += v;
      weighted += y * v;
    }
  if (total <= 0.0) throw StatError("frame holds no counts");
  const int row = std::clamp(static_cast<int>(std::lround(weighted / total)),
                             0, h - 1);
  if (row_out) *row_out = row;

  std::vector<double> profile(w);
  for (int x = 0; x < w; ++x)
    profile[x] = static_cast<double>(frame.counts.at(x, row));
  return visibility(profile);
}

double snr_total(const SnrInputs& in, SnrChannel channel) {
  if (in.s_heralded < 0.0 || in.n_herald_dark < 0.0 || in.n_dark_dark < 0.0 ||
      in.s_nonheralded < 0.0 || in.n_nonheralded < 0.0)
    throw ConfigError("signal-to-noise inputs must be >= 0");
  if (channel == SnrChannel::heralded) {
    const double noise =
        in.n_herald_dark + (in.neglect_dark_dark ? 0.0 : in.n_dark_dark);
    if (noise <= 0.0) throw StatError("heralded noise floor is zero");
    return in.s_heralded / noise;
  }
  if (in.n_nonheralded <= 0.0)
    throw StatError("non-heralded noise floor is zero");
  return in.s_nonheralded / in.n_nonheralded;
}

double eval_fringe(const FitParams& p, double x) {
  const double dx = x - p.x0;
  const double env = std::exp(-dx * dx / (2.0 * p.w * p.w));
  return p.y0 + p.a * env * (1.0 + p.b * std::sin(p.omega * x + p.phi));
}

namespace {

double cost_of(const FitParams& p, const std::vector<double>& y) {
  double c = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = eval_fringe(p, static_cast<double>(i)) - y[i];
    c += r * r;
  }
  return c;
}

// Starting point estimated from the data alone; see the header contract.
FitParams initial_guess(const std::vector<double>& y) {
  const int m = static_cast<int>(y.size());
  FitParams p;
  p.y0 = *std::min_element(y.begin(), y.end());

  double q_sum = 0.0, q_x = 0.0;
  for (int i = 0; i < m; ++i) {
    const double q = y[i] - p.y0;
    q_sum += q;
    q_x += q * i;
  }
  if (q_sum <= 0.0) {  // flat profile, nothing to seed from
    p.x0 = (m - 1) / 2.0;
    p.w = std::max(1.0, m / 4.0);
    return p;
  }
  p.x0 = q_x / q_sum;
  double q_xx = 0.0;
  for (int i = 0; i < m; ++i)
    q_xx += (y[i] - p.y0) * (i - p.x0) * (i - p.x0);
  p.w = std::max(1.0, std::sqrt(q_xx / q_sum));

  // Detrend with a moving average, then take the strongest spectral line of
  // the remainder as the carrier estimate.
  const int half = std::max(2, m / 16);
  std::vector<double> detr(m);
  for (int i = 0; i < m; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(m - 1, i + half);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += y[j];
    detr[i] = y[i] - s / (hi - lo + 1);
  }
  double best_power = -1.0;
  int best_k = 1;
  std::vector<double> power(m / 2 + 1, 0.0);
  for (int k = 1; k <= m / 2 - 1; ++k) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < m; ++i) {
      const double ang = kTwoPi * k * i / m;
      re += detr[i] * std::cos(ang);
      im += detr[i] * std::sin(ang);
    }
    power[k] = re * re + im * im;
    if (power[k] > best_power) {
      best_power = power[k];
      best_k = k;
    }
  }
  double kf = best_k;
  if (best_k > 1 && best_k < m / 2 - 1) {
    // Parabolic refinement between neighbouring bins.
    const double pm = power[best_k - 1], pc = power[best_k],
                 pp = power[best_k + 1];
    const double den = pm - 2.0 * pc + pp;
    if (den < 0.0) kf += 0.5 * (pm - pp) / den;
  }
  p.omega = kTwoPi * kf / m;

  double cs = 0.0, sn = 0.0;
  for (int i = 0; i < m; ++i) {
    cs += detr[i] * std::cos(p.omega * i);
    sn += detr[i] * std::sin(p.omega * i);
  }
  p.phi = std::atan2(cs, sn);

  // Linear least squares for a and a*b with the shape terms fixed.
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, t1 = 0.0, t2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double dx = i - p.x0;
    const double env = std::exp(-dx * dx / (2.0 * p.w * p.w));
    const double mod = env * std::sin(p.omega * i + p.phi);
    const double target = y[i] - p.y0;
    s11 += env * env;
    s12 += env * mod;
    s22 += mod * mod;
    t1 += env * target;
    t2 += mod * target;
  }
  const double det = s11 * s22 - s12 * s12;
  double a = 0.0, ab = 0.0;
  if (std::abs(det) > 1e-12 * std::max(1.0, s11 * s22)) {
    a = (t1 * s22 - t2 * s12) / det;
    ab = (t2 * s11 - t1 * s12) / det;
  } else if (s11 > 0.0) {
    a = t1 / s11;
  }
  p.a = a;
  p.b = (std::abs(a) > 1e-12 && std::isfinite(ab / a)) ? ab / a : 0.0;
  p.b = std::clamp(p.b, -2.0, 2.0);
  return p;
}

void canonicalize(FitParams& p) {
  p.w = std::abs(p.w);
  if (p.omega < 0.0) {
    // b sin(-|w|x + phi) = -b sin(|w|x - phi)
    p.omega = -p.omega;
    p.phi = -p.phi;
    p.b = -p.b;
  }
  if (p.b < 0.0) {
    p.b = -p.b;
    p.phi += kPi;
  }
  p.phi = std::remainder(p.phi, kTwoPi);
  if (p.phi <= -kPi) p.phi += kTwoPi;
}

}  // namespace

FitResult fit_fringe(const std::vector<double>& y, const FitParams* start) {
  const int m = static_cast<int>(y.size());
  if (m < 8) throw DataError("profile too short to fit");
  for (const double v : y)
    if (!std::isfinite(v)) throw DataError("profile holds a non-finite value");

  FitParams p = start ? *start : initial_guess(y);
  if (!(p.w > 0.0)) p.w = 1.0;
  double cost = cost_of(p, y);

  using Mat7 = Eigen::Matrix<double, 7, 7>;
  using Vec7 = Eigen::Matrix<double, 7, 1>;

  FitResult out;
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  for (; iter < 500; ++iter) {
    Mat7 hess = Mat7::Zero();
    Vec7 grad = Vec7::Zero();
    for (int i = 0; i < m; ++i) {
      const double x = i;
      const double dx = x - p.x0;
      const double env = std::exp(-dx * dx / (2.0 * p.w * p.w));
      const double arg = p.omega * x + p.phi;
      const double s = std::sin(arg), c = std::cos(arg);
      const double mod = 1.0 + p.b * s;
      const double r = p.y0 + p.a * env * mod - y[i];

      Vec7 jac;
      jac(0) = 1.0;                                      // y0
      jac(1) = env * mod;                                // a
      jac(2) = p.a * env * mod * dx / (p.w * p.w);       // x0
      jac(3) = p.a * env * mod * dx * dx / (p.w * p.w * p.w);  // w
      jac(4) = p.a * env * s;                            // b
      jac(5) = p.a * env * p.b * c * x;                  // omega
      jac(6) = p.a * env * p.b * c;                      // phi

      hess.noalias() += jac * jac.transpose();
      grad.noalias() += jac * r;
    }

    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      Mat7 damped = hess;
      for (int d = 0; d < 7; ++d)
        damped(d, d) += lambda * std::max(hess(d, d), 1e-12);
      const Vec7 step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      FitParams trial = p;
      trial.y0 += step(0);
      trial.a += step(1);
      trial.x0 += step(2);
      trial.w += step(3);
      trial.b += step(4);
      trial.omega += step(5);
      trial.phi += step(6);
      if (!(std::abs(trial.w) > 1e-6)) {
        lambda *= 10.0;
        continue;
      }
      const double trial_cost = cost_of(trial, y);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel =
            (cost - trial_cost) / std::max(cost, 1e-300);
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        if (rel < 1e-9) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || converged) {
      converged = converged || cost == 0.0;
      break;
    }
  }

  canonicalize(p);
  out.params = p;
  out.iterations = iter + 1;
  out.converged = converged;
  out.residual_rms = std::sqrt(cost / m);

  const double yspan = *std::max_element(y.begin(), y.end()) -
                       *std::min_element(y.begin(), y.end());
  const double fringe_amp = std::abs(p.a * p.b);
  out.degenerate =
      fringe_amp < 1e-9 * std::max(yspan, 1e-300) ||
      (out.residual_rms > 0.0 &&
       fringe_amp * std::sqrt(m / 2.0) < 3.0 * out.residual_rms);
  return out;
}

FringeSnr fringe_snr(const FitResult& fit, int n_samples) {
  if (n_samples < 2) throw ConfigError("need at least two samples");
  FringeSnr out;
  out.residual_rms = fit.residual_rms;
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (int i = 0; i < n_samples; ++i) {
    const double v = eval_fringe(fit.params, static_cast<double>(i));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.signal_span = hi - lo;
  if (out.residual_rms <= 0.0 ||
      out.signal_span / out.residual_rms > 1e6) {
    out.snr = out.signal_span > 0.0 ? 1e6 : 0.0;
    out.capped = out.signal_span > 0.0;
  } else {
    out.snr = out.signal_span / out.residual_rms;
  }
  return out;
}

}  // namespace holosim
