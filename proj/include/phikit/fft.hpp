#pragma once

#include <phikit/grid.hpp>

namespace phikit::detail {

/// Unnormalized multi-dimensional DFT over the grid's sample lattice,
/// C-order layout. forward: sum f_j exp(-2*pi*i*j*m/N); inverse: conjugate
/// kernel, no 1/N^n scaling. Callers apply quadrature weights.
void dft(const GridSpec& grid, CArray& data, bool inverse);

}  // namespace phikit::detail
