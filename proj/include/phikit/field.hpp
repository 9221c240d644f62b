#pragma once

#include <phikit/fft.hpp>
#include <phikit/grid.hpp>

#include <memory>

namespace phikit {

/// A complex field sampled on the periodic box, carrying both the space view
/// and the frequency view. The two views are tied together by the discrete
/// transform normalized to the (2*pi)^{-n/2} continuous convention:
///
///   spectrum[m] = (2*pi)^{-n/2} * h^n     * sum_j space[j] exp(-i x_j . xi_m)
///   space[j]    = (2*pi)^{-n/2} * (2*pi/L)^n * sum_m spectrum[m] exp(+i x_j . xi_m)
///
/// The composition of the two weights is exactly 1, so round trips are exact
/// to rounding. Fields are immutable after construction.
class SampledField {
  public:
    SampledField(const SampledField&) = default;
    SampledField(SampledField&&) = default;
    SampledField& operator=(const SampledField&) = default;
    SampledField& operator=(SampledField&&) = default;

    static SampledField from_space(const GridSpec& grid, CArray space);
    static SampledField from_spectrum(const GridSpec& grid, CArray spectrum);
    static SampledField zero(const GridSpec& grid) {
        return from_spectrum(grid, CArray::Zero(grid.total_samples()));
    }

    const GridSpec& grid() const { return grid_; }
    const CArray& space() const { return *space_; }
    const CArray& spectrum() const { return *spectrum_; }

    Complex value_at(const IndexX& sample_index) const { return space()[grid_.flatten(sample_index)]; }

    SampledField operator+(const SampledField& o) const;
    SampledField operator-(const SampledField& o) const;
    SampledField operator*(Complex c) const;
    friend SampledField operator*(Complex c, const SampledField& f) { return f * c; }

  private:
    SampledField(GridSpec g, std::shared_ptr<const CArray> sp, std::shared_ptr<const CArray> fr)
        : grid_(g), space_(std::move(sp)), spectrum_(std::move(fr)) {}

    GridSpec grid_;
    std::shared_ptr<const CArray> space_;
    std::shared_ptr<const CArray> spectrum_;
};

/// Spectrum of f under the stated convention; identical to f.spectrum().
inline const CArray& forward_transform(const SampledField& f) { return f.spectrum(); }

/// Plain pointwise product in space (used for windowing, not convolution).
SampledField pointwise_product(const SampledField& f, const SampledField& g);

/// <f, g> = integral of f * conj(g) over the box (Riemann sum).
Complex inner_product(const SampledField& f, const SampledField& g);

/// Riemann-sum L^p norm with weight h^n; p = infinity returns the max modulus.
double lp_norm(const SampledField& f, double p);

/// tau_y f = f(. - y) for a shift on the sample lattice or, equivalently and
/// exactly on the torus, a spectral phase for arbitrary real shifts.
SampledField translate(const SampledField& f, const PointX& shift);

/// Modulation by a grid mode: f -> exp(i xi_m . x) f. Exact spectral shift.
SampledField modulate(const SampledField& f, const IndexX& mode);

/// Second order difference tau_{-h} f + tau_h f - 2 f with periodic wrap.
SampledField second_difference(const SampledField& f, const IndexX& lattice_shift);

/// f_nu(x) = 2^{nu n} f(2^nu x), interpreted in centered coordinates with a
/// single copy (no wrap replication): compression (nu > 0) zero-extends
/// outside the box, expansion (nu < 0) evaluates the trigonometric
/// interpolant. Either direction requires the essential content of f to be
/// representable at the target scale.
SampledField dilate(const SampledField& f, int nu);

/// Discrete Hardy-Littlewood maximal function over grid-aligned cubes
/// centered at each sample, radii 0 and powers of two (in samples).
SampledField hl_maximal(const SampledField& f);

/// max_j |f_j - g_j|.
double max_abs_difference(const SampledField& f, const SampledField& g);

/// Relative transform round-trip error (diagnostic for the view invariant).
double roundtrip_error(const SampledField& f);

/// |parseval lhs - rhs| / lhs for the two views of f.
double parseval_gap(const SampledField& f);

}  // namespace phikit
