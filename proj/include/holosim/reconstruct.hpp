#pragma once

#include "holosim/fft.hpp"
#include "holosim/grid.hpp"

namespace holosim {

// Off-axis hologram demodulation.  The recorded frame carries the object
// term on a spatial carrier; reconstruction isolates the +1 diffraction
// order in the spectrum and strips the carrier, leaving amplitude and
// object phase per pixel.

enum class MaskShape { disk, rect };

// Passband around the +1 order, in DC-centred frequency pixels.  disk
// keeps |k - centre| <= radius, rect keeps the (2r+1) square.  The mask
// must stay strictly inside the Nyquist square and, when not centred on
// DC, must not contain the DC bin (a mask reaching DC mixes the orders).
// The one exception is a rect mask covering the whole plane, which is the
// identity.
struct OrderMask {
  int centre_u = 0;  // frequency index relative to DC, x direction
  int centre_v = 0;
  int radius = 0;
  MaskShape shape = MaskShape::disk;
};

struct OrderLocation {
  int u = 0;  // relative to DC
  int v = 0;
  double peak_mag = 0.0;
  double floor_mag = 0.0;  // median magnitude over the searched half plane
};

// Finds the +1 order as the magnitude argmax over the half plane
// (v > 0) or (v == 0 and u > 0), excluding a guard square of
// guard_radius around DC (negative picks max(2, min(dims)/16)).  Throws
// StatError when the best candidate does not stand clear of the leakage
// floor, which is what overlapping orders or a fringe-free frame produce.
OrderLocation locate_first_order(const Spectrum& spec, int guard_radius = -1);

// Default passband radius used by the tools: floor(min(dims) / 8).
int default_mask_radius(int width, int height);

// Zeroes every bin outside the mask.  Throws ConfigError on masks that
// touch the Nyquist boundary or reach DC (see OrderMask).
Spectrum isolate_order(const Spectrum& spec, const OrderMask& mask);

// Inverse transform of an isolated order: per-pixel amplitude and wrapped
// phase (carrier still included).
ComplexField reconstruct(const Spectrum& isolated);

// Reference wave estimated from a (2*half_width)^2 block of spectrum bins
// starting at the order centre: the inverse transform of just that block,
// whose phase is the carrier ramp.  Throws ConfigError if the block leaves
// the spectrum.
ComplexField linear_phase_reference(const Spectrum& spec, int centre_u,
                                    int centre_v, int half_width = 1);

// Conjugate multiplication: field * conj(reference) cancels the carrier
// and leaves the object phase.
ComplexField remove_linear_phase(const ComplexField& field,
                                 const ComplexField& reference);

// Alternative carrier removal: circularly shift the isolated order so its
// centre lands on DC, then invert.  Agrees with the conjugate-multiply
// route up to a constant phase when the carrier sits on a bin centre.
ComplexField reconstruct_recentred(const Spectrum& spec,
                                   const OrderMask& mask);

enum class ReconstructionMethod { conjugate_multiply, recentre };

struct ReconstructionResult {
  ComplexField object;     // carrier removed
  OrderLocation order;
  OrderMask mask;
};

// Full chain on a count frame: transform, locate the +1 order, isolate,
// remove the carrier with the chosen method.  mask_radius < 0 selects the
// default; ref_half_width feeds linear_phase_reference.
ReconstructionResult reconstruct_hologram(
    const HologramFrame& frame,
    ReconstructionMethod method = ReconstructionMethod::conjugate_multiply,
    int mask_radius = -1, int ref_half_width = 1, MaskShape shape = MaskShape::disk);

// Same chain on a real-valued intensity or rate map, for noise-free
// analysis of the forward model.
ReconstructionResult reconstruct_hologram(
    const Grid<double>& image, double pixel_size_m,
    ReconstructionMethod method = ReconstructionMethod::conjugate_multiply,
    int mask_radius = -1, int ref_half_width = 1, MaskShape shape = MaskShape::disk);

// Wrapped difference a - b in (-pi, pi].
double wrap_phase(double radians);

// Circular median of the phases at the marked pixels.
double phase_region_median(const Grid<cplx>& field,
                           const Grid<std::uint8_t>& region);

}  // namespace holosim
