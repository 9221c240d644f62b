#pragma once

#include <phikit/almost_diag.hpp>

namespace phikit {

/// Continuous off-diagonal kernel K(x, y).
using KernelFn = std::function<Complex(const PointX&, const PointX&)>;

struct KernelEstimateReport {
    double delta = 0.0;
    double size_constant = 0.0;      // least C with |K| <= C |x-y|^{1-n}
    double smooth_x_constant = 0.0;  // second differences in the first slot
    double smooth_y_constant = 0.0;  // second differences in the second slot
    std::vector<double> strata_size_fits;  // per-separation-stratum size fits
    bool strata_stable = false;      // fits vary <= 10% across strata
    bool order_minus_one = false;    // no divergence toward the diagonal
    int sample_count = 0;
};

struct KernelCheckOptions {
    int directions = 12;
    int h_directions = 6;
    std::vector<double> h_fractions = {0.5, 0.25, 0.125};
    // separation window; zeros select the defaults (4 cells, L/4)
    double sep_min = 0.0;
    double sep_max = 0.0;
};

/// Fits the least constants in the order -1 size and second-difference
/// smoothness estimates over a stratified sample: separations geometric from
/// 4 grid cells to L/4, displacements at fractions of the separation (all
/// grid-snapped, 0 < |h| <= s/2). Expensive synthesized kernels can lower the
/// sampling density through the options.
KernelEstimateReport check_standard_kernel(const GridSpec& grid, const KernelFn& kernel,
                                           double delta, const KernelCheckOptions& opts = {});

/// Truncated double sum K(x, y) = sum_Q sum_P A_{Q,P} phi_P(y) psi_Q(x),
/// restricted to cubes within radius_in_sides cube sides of the evaluation
/// points. x and y are grid points at least one sample apart.
Complex synthesize_kernel(const OperatorMatrix& A, const LittlewoodPaleyPair& pair,
                          const PointX& x, const PointX& y, double radius_in_sides = 8.0);

/// Same sum with entries produced on the fly (for weight-majorant matrices
/// too large to store).
Complex synthesize_kernel_fn(const TruncatedLattice& lattice, const LittlewoodPaleyPair& pair,
                             const std::function<Complex(const DyadicCube&, const DyadicCube&)>& entry,
                             const PointX& x, const PointX& y, double radius_in_sides = 8.0);

/// The part of a multiplier operator's torus kernel that the lattice's frame
/// cannot synthesize: the double frame sum reassembles the Fourier series of
/// m(xi) * partition(xi)^2, so the remnant carries m * (1 - partition^2) over
/// the nonzero modes. Exact; reported alongside synthesized-kernel matches.
SampledField uncovered_multiplier_remnant(const Operator& T, const LittlewoodPaleyPair& pair,
                                          const TruncatedLattice& lattice);

struct RieszCalibration {
    double constant = 0.0;    // c in c |x-y|^{s-n}
    double background = 0.0;  // additive torus background at mid range
    double background_quad = 0.0;  // quadratic term of the smooth background
    double residual = 0.0;    // rms relative misfit over the window
    double window_lo = 0.0, window_hi = 0.0;

    double model(double d) const {
        return constant * std::pow(d, exponent) + background + background_quad * d * d;
    }
    double exponent = 0.0;  // s - n
};

/// Least-squares fit of c in c |x|^{s-n} against the spatial kernel of the
/// multiplier I^s (obtained by applying I^s to a unit-mass grid impulse),
/// together with the smooth even background b0 + b2 |x|^2 that periodization
/// adds on the torus. Throws when the fit residual exceeds 5%.
RieszCalibration calibrate_riesz_constant(const GridSpec& grid, double s = 1.0);

struct ZeroOperatorVerdict {
    bool operator_vanishes = false;  // max ||T psi_P||_inf below tolerance
    double max_application = 0.0;
    double max_kernel_value = 0.0;   // synthesized kernel over sampled points
    bool pass = false;               // vanishing operator implies vanishing kernel
};

/// Zero-operator sanity: when every T(psi_P) vanishes, the synthesized
/// kernel must vanish off the diagonal.
ZeroOperatorVerdict zero_operator_sanity(const OperatorMatrix& A, const LittlewoodPaleyPair& pair,
                                         double op_tol = 1e-10, double kernel_tol = 1e-9);

}  // namespace phikit
