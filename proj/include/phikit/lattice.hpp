#pragma once

#include <phikit/lp_frame.hpp>

#include <functional>
#include <vector>

namespace phikit {

/// Dyadic cube Q_{nu,k}: corner x_Q = 2^{-nu} k, side l(Q) = 2^{-nu}. The
/// index k lives modulo L * 2^nu per axis under the periodic wrap.
struct DyadicCube {
    int nu = 0;
    IndexX k;

    double side() const { return std::ldexp(1.0, -nu); }
    double volume(int dimension) const { return std::pow(side(), dimension); }
    PointX corner() const {
        PointX x(k.size());
        for (int a = 0; a < k.size(); ++a) x[a] = std::ldexp(double(k[a]), -nu);
        return x;
    }
    bool operator==(const DyadicCube& o) const { return nu == o.nu && k == o.k; }
};

struct CubeGeometry {
    double min_side = 0.0;   // l(P) /\ l(Q)
    double max_side = 0.0;   // l(P) \/ l(Q)
    double distance = 0.0;   // |x_P - x_Q| in the torus metric
};

/// Finite stand-in for the full dyadic lattice: every scale nu in
/// [nu_min, nu_max] whose frequency annulus (2^{nu-1}, 2^{nu+1}) sits strictly
/// inside the resolvable band, with the full set of k per scale. Requires the
/// box to hold a whole number of coarsest cubes and the finest cube to hold a
/// whole number of samples, so that space-side cube operations are exact.
class TruncatedLattice {
  public:
    TruncatedLattice(const GridSpec& grid, int nu_min, int nu_max);

    const GridSpec& grid() const { return grid_; }
    int nu_min() const { return nu_min_; }
    int nu_max() const { return nu_max_; }
    int scale_count() const { return nu_max_ - nu_min_ + 1; }

    /// Cubes per axis at scale nu (exact integer L * 2^nu).
    std::int64_t cubes_per_axis(int nu) const;
    std::int64_t cubes_at_scale(int nu) const;
    std::int64_t cube_count() const { return total_; }

    /// Flat enumeration: scales in increasing order, k in C order within scale.
    DyadicCube cube(std::int64_t flat) const;
    std::int64_t index_of(const DyadicCube& q) const;
    std::int64_t scale_offset(int nu) const;

    /// Samples per cube side at scale nu (exact integer 2^{-nu} / h).
    std::int64_t samples_per_side(int nu) const;

    /// The cube of scale nu containing the sample with the given flat index.
    DyadicCube cube_containing(int nu, std::int64_t sample_flat) const;

  private:
    GridSpec grid_;
    int nu_min_, nu_max_;
    std::vector<std::int64_t> offsets_;
    std::int64_t total_ = 0;
};

CubeGeometry cube_geometry(const GridSpec& grid, const DyadicCube& p, const DyadicCube& q);

/// f_Q = |Q|^{1/2} f_nu(. - x_Q): localized, L^2-normalized translate/dilate.
SampledField localize(const SampledField& f, const DyadicCube& q);

/// |Q|^{-1/2} * indicator of Q sampled on the grid. Requires l(Q) >= spacing.
SampledField normalized_indicator(const GridSpec& grid, const DyadicCube& q);

/// The periodization of the continuum cube function fam_Q, built spectrally:
/// spectrum[m] = |Q|^{1/2} exp(-i x_Q . xi_m) * (2*pi)^{-n/2} fam_hat(2^{-nu} |xi_m|).
SampledField cube_field(const LittlewoodPaleyPair& pair, Family fam, const DyadicCube& q);
SampledField cube_field(const GridSpec& grid, const std::function<double(double)>& profile_hat,
                        const DyadicCube& q);

}  // namespace phikit
