#pragma once

#include <cstdint>
#include <vector>

#include "holosim/grid.hpp"

namespace holosim {

// Fringe visibility (N_max - N_min) / (N_max + N_min) from one count
// profile.  The maximum is the interior local maximum nearest the
// intensity centroid and the minimum is the next local minimum to its
// right (the profile end counts as a minimum).  Profiles without an
// interior local maximum have no fringe to measure and throw StatError.
struct VisibilityResult {
  double visibility = 0.0;
  int max_index = 0;
  int min_index = 0;
  double max_value = 0.0;
  double min_value = 0.0;
};

VisibilityResult visibility(const std::vector<double>& profile);

// Visibility of the frame row through the count centroid.
VisibilityResult frame_visibility(const HologramFrame& frame, int* row = nullptr);

// Whole-image signal-to-noise from mean signal and noise rates.  The
// heralded channel divides by accidental herald x dark coincidences plus,
// unless neglected (the default, they are orders below everything else),
// dark x dark coincidences.  The non-heralded channel divides by its
// background floor.
struct SnrInputs {
  double s_heralded = 0.0;
  double n_herald_dark = 0.0;
  double n_dark_dark = 0.0;
  bool neglect_dark_dark = true;
  double s_nonheralded = 0.0;
  double n_nonheralded = 0.0;
};

enum class SnrChannel { heralded, nonheralded };

double snr_total(const SnrInputs& in, SnrChannel channel);

// Gaussian-envelope fringe model fitted to a line profile,
//   y(x) = y0 + a * exp(-(x-x0)^2/(2 w^2)) * (1 + b sin(omega x + phi)),
// x being the sample index.  Fitted by damped Gauss-Newton with the
// analytic Jacobian; the damping factor steps down on accepted iterations
// and up on rejected ones, so the cost never increases.  Initial values
// come from the data: y0 from the floor, x0/w from moments, omega from the
// spectrum of the detrended profile, phi from quadrature projection, a and
// b from a linear solve.  Convergence: relative cost change < 1e-9 or 500
// iterations.
struct FitParams {
  double y0 = 0.0;
  double a = 0.0;
  double x0 = 0.0;
  double w = 1.0;
  double b = 0.0;
  double omega = 0.0;
  double phi = 0.0;
};

struct FitResult {
  FitParams params;
  double residual_rms = 0.0;  // sqrt(sum (y_i - fit_i)^2 / m)
  int iterations = 0;
  bool converged = false;
  // No usable fringe component: omega and phi are not identified.
  bool degenerate = false;
};

FitResult fit_fringe(const std::vector<double>& y,
                     const FitParams* start = nullptr);

double eval_fringe(const FitParams& p, double x);

// Fitted-fringe signal-to-noise: (max - min of the fitted curve over the
// sample range) / residual_rms.  A vanishing residual caps the ratio at
// 1e6 and sets `capped`.
struct FringeSnr {
  double snr = 0.0;
  bool capped = false;
  double signal_span = 0.0;
  double residual_rms = 0.0;
};

FringeSnr fringe_snr(const FitResult& fit, int n_samples);

}  // namespace holosim
