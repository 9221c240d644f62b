#include <phikit/lattice.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace phikit {

namespace {

bool near_integer(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol; }

}  // namespace

TruncatedLattice::TruncatedLattice(const GridSpec& grid, int nu_min, int nu_max)
    : grid_(grid), nu_min_(nu_min), nu_max_(nu_max) {
    if (nu_min > nu_max) throw std::invalid_argument("TruncatedLattice: nu_min > nu_max");

    const double fundamental = grid.mode_spacing();
    const double band_top = 0.9 * grid.nyquist();
    for (int nu = nu_min; nu <= nu_max; ++nu) {
        if (!(std::ldexp(1.0, nu - 1) > fundamental))
            throw std::invalid_argument(
                "TruncatedLattice: annulus of scale " + std::to_string(nu) +
                " is not strictly above the fundamental mode");
        if (!(std::ldexp(1.0, nu + 1) < band_top))
            throw std::invalid_argument("TruncatedLattice: annulus of scale " +
                                        std::to_string(nu) + " exceeds 0.9x Nyquist");
    }
    if (!near_integer(grid.box_side * std::ldexp(1.0, nu_min)))
        throw std::invalid_argument(
            "TruncatedLattice: box side must be a whole number of coarsest cubes");
    if (!near_integer(std::ldexp(1.0, -nu_max) / grid.spacing()))
        throw std::invalid_argument(
            "TruncatedLattice: finest cube side must be a whole number of samples");

    offsets_.resize(scale_count() + 1);
    offsets_[0] = 0;
    for (int nu = nu_min; nu <= nu_max; ++nu)
        offsets_[nu - nu_min + 1] = offsets_[nu - nu_min] + cubes_at_scale(nu);
    total_ = offsets_.back();
}

std::int64_t TruncatedLattice::cubes_per_axis(int nu) const {
    return std::int64_t(std::llround(grid_.box_side * std::ldexp(1.0, nu)));
}

std::int64_t TruncatedLattice::cubes_at_scale(int nu) const {
    std::int64_t c = 1;
    for (int a = 0; a < grid_.dimension; ++a) c *= cubes_per_axis(nu);
    return c;
}

std::int64_t TruncatedLattice::scale_offset(int nu) const { return offsets_[nu - nu_min_]; }

DyadicCube TruncatedLattice::cube(std::int64_t flat) const {
    if (flat < 0 || flat >= total_) throw std::out_of_range("TruncatedLattice::cube");
    int nu = nu_min_;
    while (flat >= offsets_[nu - nu_min_ + 1]) ++nu;
    std::int64_t rem = flat - offsets_[nu - nu_min_];
    const std::int64_t m = cubes_per_axis(nu);
    IndexX k(grid_.dimension);
    for (int a = grid_.dimension - 1; a >= 0; --a) {
        k[a] = rem % m;
        rem /= m;
    }
    return DyadicCube{nu, k};
}

std::int64_t TruncatedLattice::index_of(const DyadicCube& q) const {
    if (q.nu < nu_min_ || q.nu > nu_max_) throw std::out_of_range("TruncatedLattice::index_of");
    const std::int64_t m = cubes_per_axis(q.nu);
    std::int64_t rem = 0;
    for (int a = 0; a < grid_.dimension; ++a) {
        std::int64_t kk = q.k[a] % m;
        if (kk < 0) kk += m;
        rem = rem * m + kk;
    }
    return offsets_[q.nu - nu_min_] + rem;
}

std::int64_t TruncatedLattice::samples_per_side(int nu) const {
    return std::int64_t(std::llround(std::ldexp(1.0, -nu) / grid_.spacing()));
}

DyadicCube TruncatedLattice::cube_containing(int nu, std::int64_t sample_flat) const {
    IndexX idx = grid_.unflatten(sample_flat);
    const std::int64_t per = samples_per_side(nu);
    IndexX k(grid_.dimension);
    for (int a = 0; a < grid_.dimension; ++a) k[a] = idx[a] / per;
    return DyadicCube{nu, k};
}

CubeGeometry cube_geometry(const GridSpec& grid, const DyadicCube& p, const DyadicCube& q) {
    CubeGeometry out;
    const double lp = p.side(), lq = q.side();
    out.min_side = std::min(lp, lq);
    out.max_side = std::max(lp, lq);
    out.distance = grid.torus_distance(p.corner(), q.corner());
    return out;
}

SampledField localize(const SampledField& f, const DyadicCube& q) {
    // f_Q = |Q|^{1/2} f_nu(. - x_Q) with |Q|^{1/2} = side^{n/2}
    SampledField scaled = dilate(f, q.nu) * std::pow(q.side(), 0.5 * f.grid().dimension);
    return translate(scaled, q.corner());
}

SampledField normalized_indicator(const GridSpec& grid, const DyadicCube& q) {
    const double per = q.side() / grid.spacing();
    if (per < 1.0 - 1e-12) throw std::domain_error("normalized_indicator: cube below one sample");
    if (std::abs(per - std::round(per)) > 1e-9)
        throw std::domain_error("normalized_indicator: cube side not sample-aligned");
    const std::int64_t side = std::int64_t(std::llround(per));
    const std::int64_t N = grid.samples_per_axis;
    const double amp = std::pow(q.side(), -0.5 * grid.dimension);

    CArray vals = CArray::Zero(grid.total_samples());
    // start index per axis
    IndexX start(grid.dimension);
    for (int a = 0; a < grid.dimension; ++a) {
        const double s = q.corner()[a] / grid.spacing();
        if (std::abs(s - std::round(s)) > 1e-9)
            throw std::domain_error("normalized_indicator: corner not sample-aligned");
        std::int64_t si = std::int64_t(std::llround(s)) % N;
        if (si < 0) si += N;
        start[a] = si;
    }
    std::int64_t cells = 1;
    for (int a = 0; a < grid.dimension; ++a) cells *= side;
    for (std::int64_t c = 0; c < cells; ++c) {
        std::int64_t rem = c;
        IndexX idx(grid.dimension);
        for (int a = grid.dimension - 1; a >= 0; --a) {
            idx[a] = start[a] + rem % side;
            rem /= side;
        }
        vals[grid.flatten(idx)] = amp;
    }
    return SampledField::from_space(grid, std::move(vals));
}

SampledField cube_field(const GridSpec& grid, const std::function<double(double)>& profile_hat,
                        const DyadicCube& q) {
    const std::int64_t total = grid.total_samples();
    const double conv = std::pow(2.0 * M_PI, -0.5 * grid.dimension);
    const double amp = std::pow(q.volume(grid.dimension), 0.5);
    const PointX xq = q.corner();
    CArray spec(total);
    for (std::int64_t i = 0; i < total; ++i) {
        const double v = profile_hat(std::ldexp(grid.mode_radius(i), -q.nu));
        if (v == 0.0) {
            spec[i] = 0.0;
            continue;
        }
        PointX xi = grid.mode_point(i);
        double phase = 0.0;
        for (int a = 0; a < grid.dimension; ++a) phase -= xq[a] * xi[a];
        spec[i] = conv * amp * v * std::polar(1.0, phase);
    }
    return SampledField::from_spectrum(grid, std::move(spec));
}

SampledField cube_field(const LittlewoodPaleyPair& pair, Family fam, const DyadicCube& q) {
    return cube_field(pair.grid(), [&](double r) { return pair.family_hat(fam, r); }, q);
}

}  // namespace phikit
