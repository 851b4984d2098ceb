#pragma once

#include "holosim/grid.hpp"

namespace holosim {

// Unitary 2D DFT (1/sqrt(N) on each direction of the transform), so
// Parseval's identity holds exactly and fft2 followed by ifft2 is the
// identity to rounding.  Arbitrary grid sizes are supported.  Results are
// returned DC-centred; see Spectrum.
Spectrum fft2(const Grid<cplx>& image, double pixel_size_m);
Spectrum fft2(const Grid<double>& image, double pixel_size_m);
Grid<cplx> ifft2(const Spectrum& spectrum);

// Index permutations between natural DFT order and DC-centred order:
// natural_to_centred(k) = (k + n/2) % n and its inverse.
int centred_to_natural(int idx, int n);
int natural_to_centred(int idx, int n);

}  // namespace holosim
