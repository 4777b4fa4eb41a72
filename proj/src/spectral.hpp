#ifndef FLATLAB_SPECTRAL_HPP
#define FLATLAB_SPECTRAL_HPP

#include <complex>

#include "grid.hpp"

namespace flatlab {

using cplx = std::complex<double>;

// DFT-based partial derivative along one axis: mode kappa is multiplied by
// 2*pi*i*kappa, the Nyquist mode is dropped. Exact on band-limited data with
// max mode < N/2.
void spectral_derivative(const TorusGrid& grid, const double* in, double* out, int axis);
void spectral_derivative(const TorusGrid& grid, const cplx* in, cplx* out, int axis);

// Fraction of spectral energy carried by modes with any |kappa| >= N/4.
// Smoothness proxy for grid-sampled group elements.
double fourier_tail_fraction(const TorusGrid& grid, const cplx* field);

}  // namespace flatlab

#endif
