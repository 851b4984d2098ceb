#pragma once

#include <cstdint>

#include "holosim/grid.hpp"

namespace holosim {

// Complex object reflectivity sampled on the scan grid, |o| <= 1.
struct ObjectMap {
  Grid<cplx> amplitude;
  double pixel_size_m = 30e-6;
};

// Gaussian illumination, field amplitude G = peak * exp(-r^2 / waist^2)
// around (centre_x_m, centre_y_m).
struct BeamProfile {
  double centre_x_m = 0.0;
  double centre_y_m = 0.0;
  double waist_m = 6e-4;
  double peak_amplitude = 1.0;
};

// Reference-arm tilt as spatial carrier frequencies in cycles per metre.
// At least one component must be nonzero for an off-axis hologram.
struct TiltConfig {
  double fx_cpm = 0.0;
  double fy_cpm = 0.0;
};

// Image-plane interference of the tilted reference r = G*exp(-i*2pi*(fx x +
// fy y)) with the object-arm field G*o:
//   I = |r|^2 + |G o|^2 + r conj(G o) + conj(r) G o.
// The conjugate ramp on the reference puts the order that carries o (not
// conj(o)) at positive frequencies, where the demodulation looks for it.
// Deterministic, nonnegative.  The OpenMP build splits rows across threads;
// intensity_map_serial is the plain loop kept for equivalence tests.
Grid<double> intensity_map(const ObjectMap& object, const BeamProfile& beam,
                           const TiltConfig& tilt);
Grid<double> intensity_map_serial(const ObjectMap& object,
                                  const BeamProfile& beam,
                                  const TiltConfig& tilt);

// Per-pixel count-rate calibration.  The defaults reproduce the bench
// rates of the reference five-counter setup: heralded coincidences scale
// from s_heralded at the brightest pixel, the non-heralded channel adds
// its detector background on top.
struct RateCalibration {
  double s_heralded = 1.72398;    // counts / (s pixel) at max intensity
  double s_nonheralded = 68.471;  // signal component atop the background
  double background = 460.0;      // imaging-counter background, counts/s
};

struct RateMaps {
  Grid<double> heralded;
  Grid<double> nonheralded;
};

// heralded = s_h * I/max(I); nonheralded = s_nh * I/max(I) + background.
// An all-zero intensity map leaves only the background.
RateMaps rate_maps(const Grid<double>& intensity, const RateCalibration& cal);

// Built-in test objects.
ObjectMap make_flat(int width, int height, double pixel_size_m,
                    double amplitude);
ObjectMap make_mirror(int width, int height, double pixel_size_m);

// Two reflective half-discs split by a dark gap, on a dark background.
ObjectMap make_half_circles(int width, int height, double pixel_size_m,
                            double radius_frac = 0.35, double gap_frac = 0.08,
                            double amplitude = 1.0);

// Mirror with a thin plate adding step_rad of phase over the leftmost
// cover_frac of the field.  `stepped` marks the covered pixels so phase
// recovery can compare region statistics.
struct PhaseStepObject {
  ObjectMap map;
  Grid<std::uint8_t> stepped;
  double step_rad = 0.0;
};

PhaseStepObject make_phase_step(int width, int height, double pixel_size_m,
                                double step_rad, double cover_frac = 0.25);

// Beam centred on the grid with the given waist as a fraction of the frame
// width; convenience for configs that do not pin metre positions.
BeamProfile centred_beam(int width, int height, double pixel_size_m,
                         double waist_frac = 0.3125, double peak = 1.0);

// Tilt expressed as fringe cycles across the frame.
TiltConfig tilt_from_cycles(int width, int height, double pixel_size_m,
                            double cycles_x, double cycles_y);

}  // namespace holosim
