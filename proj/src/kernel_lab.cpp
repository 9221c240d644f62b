#include <phikit/kernel_lab.hpp>

#include <phikit/fft.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phikit {

namespace {

IndexX snap(const GridSpec& g, const PointX& v) {
    IndexX idx(g.dimension);
    for (int a = 0; a < g.dimension; ++a) idx[a] = std::int64_t(std::llround(v[a] / g.spacing()));
    return idx;
}

PointX lattice_point(const GridSpec& g, const IndexX& idx) {
    PointX x(g.dimension);
    for (int a = 0; a < g.dimension; ++a) x[a] = idx[a] * g.spacing();
    return x;
}

}  // namespace

KernelEstimateReport check_standard_kernel(const GridSpec& grid, const KernelFn& kernel,
                                           double delta, const KernelCheckOptions& opts) {
    if (!(delta > 0.0) || delta > 1.0)
        throw std::invalid_argument("check_standard_kernel: need 0 < delta <= 1");
    const int n = grid.dimension;
    KernelEstimateReport rep;
    rep.delta = delta;

    PointX base(n);
    for (int a = 0; a < n; ++a) base[a] = grid.box_side / 2.0;
    base = lattice_point(grid, snap(grid, base));

    const int directions = opts.directions, h_directions = opts.h_directions;
    const double sep_lo = opts.sep_min > 0.0 ? opts.sep_min : 4.0 * grid.spacing();
    const double sep_hi = opts.sep_max > 0.0 ? opts.sep_max : grid.box_side / 4.0;
    for (double sep = sep_lo; sep <= sep_hi + 1e-12; sep *= 2.0) {
        double stratum_fit = 0.0;
        for (int d = 0; d < directions; ++d) {
            const double angle = 2.0 * M_PI * d / directions;
            PointX dir = PointX::Zero(n);
            dir[0] = std::cos(angle);
            dir[n > 1 ? 1 : 0] = n > 1 ? std::sin(angle) : dir[0];
            IndexX off = snap(grid, PointX(sep * dir));
            bool nonzero = false;
            for (int a = 0; a < n; ++a) nonzero |= off[a] != 0;
            if (!nonzero) continue;
            PointX y = base + lattice_point(grid, off);
            const double dist = grid.torus_distance(base, y);
            if (dist == 0.0) continue;

            const Complex kv = kernel(base, y);
            if (!std::isfinite(kv.real()) || !std::isfinite(kv.imag()))
                throw std::invalid_argument("check_standard_kernel: non-finite kernel value");
            const double size_fit = std::abs(kv) * std::pow(dist, n - 1);
            stratum_fit = std::max(stratum_fit, size_fit);
            rep.size_constant = std::max(rep.size_constant, size_fit);
            ++rep.sample_count;

            for (double hfrac : opts.h_fractions) {
                for (int hd = 0; hd < h_directions; ++hd) {
                    const double ha = 2.0 * M_PI * hd / h_directions + 0.26;
                    PointX hdir = PointX::Zero(n);
                    hdir[0] = std::cos(ha);
                    if (n > 1) hdir[1] = std::sin(ha);
                    IndexX hoff = snap(grid, PointX(hfrac * dist * hdir));
                    PointX h = lattice_point(grid, hoff);
                    const double hlen = h.norm();
                    if (hlen == 0.0 || hlen > dist / 2.0) continue;
                    const double envelope =
                        std::pow(hlen, 1.0 + delta) * std::pow(dist, -double(n) - delta);
                    const Complex dx = kernel(base + h, y) + kernel(base - h, y) -
                                       2.0 * kernel(base, y);
                    rep.smooth_x_constant = std::max(rep.smooth_x_constant, std::abs(dx) / envelope);
                    const Complex dy = kernel(base, y + h) + kernel(base, y - h) -
                                       2.0 * kernel(base, y);
                    rep.smooth_y_constant = std::max(rep.smooth_y_constant, std::abs(dy) / envelope);
                    rep.sample_count += 2;
                }
            }
        }
        rep.strata_size_fits.push_back(stratum_fit);
    }

    double lo = rep.strata_size_fits.front(), hi = lo;
    for (double v : rep.strata_size_fits) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.strata_stable = hi > 0.0 ? (hi - lo) <= 0.10 * hi : true;
    // divergence toward the diagonal marks the wrong homogeneity: the finest
    // stratum dominates every other one by the stratum spacing factor
    double rest = 0.0;
    for (std::size_t t = 1; t < rep.strata_size_fits.size(); ++t)
        rest = std::max(rest, rep.strata_size_fits[t]);
    rep.order_minus_one = rep.strata_size_fits.front() <= 1.9 * rest;
    return rep;
}

namespace {

Complex synthesize_impl(const TruncatedLattice& lattice, const LittlewoodPaleyPair& pair,
                        const std::function<Complex(const DyadicCube&, const DyadicCube&)>& entry,
                        const PointX& x, const PointX& y, double radius_in_sides) {
    const GridSpec& g = lattice.grid();
    const int n = g.dimension;
    if (g.torus_distance(x, y) < g.spacing())
        throw std::domain_error("synthesize_kernel: x and y must be at least one sample apart");

    // For a fixed evaluation point p, the values fam_Q(p) over all cube
    // positions x_Q of one scale are a DFT of the modulated profile: one
    // transform per scale gives every cube value exactly (periodization
    // included). fam_Q(p) = |Q|^{1/2} (2 pi)^{-n/2} (2pi/L)^n
    //                       sum_m prof(2^{-nu}|xi_m|) e^{i (p - x_Q) . xi_m}
    // two (2 pi)^{-n/2} factors: the profile normalization of the cube field
    // and the inverse-transform quadrature weight
    const std::int64_t total = g.total_samples();
    const double conv = std::pow(2.0 * M_PI, -double(n)) * std::pow(g.mode_spacing(), n);
    auto scale_values = [&](Family fam, const PointX& p, int nu) {
        CArray work(total);
        for (std::int64_t i = 0; i < total; ++i) {
            const double prof = fam == Family::Phi ? pair.phi_hat(std::ldexp(g.mode_radius(i), -nu))
                                                   : pair.psi_hat(std::ldexp(g.mode_radius(i), -nu));
            if (prof == 0.0) {
                work[i] = 0.0;
                continue;
            }
            PointX xi = g.mode_point(i);
            double phase = 0.0;
            for (int a = 0; a < n; ++a) phase += p[a] * xi[a];
            work[i] = prof * std::polar(1.0, phase);
        }
        detail::dft(g, work, /*inverse=*/false);  // sum_m . e^{-i x_j xi_m} at x_j = x_Q
        work *= conv * std::pow(std::ldexp(1.0, -nu), 0.5 * n);
        return work;
    };

    std::vector<CArray> psi_tables, phi_tables;
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
        psi_tables.push_back(scale_values(Family::Psi, x, nu));
        phi_tables.push_back(scale_values(Family::Phi, y, nu));
    }

    // candidate cubes within radius_in_sides cube sides of a point, one list
    // per scale, clipped to the per-axis cube count
    auto candidates = [&](const PointX& p, int nu) {
        std::vector<DyadicCube> out;
        const std::int64_t per = lattice.cubes_per_axis(nu);
        const double side = std::ldexp(1.0, -nu);
        const std::int64_t reach = std::min<std::int64_t>(std::int64_t(std::ceil(radius_in_sides)),
                                                          per / 2);
        IndexX center(n);
        for (int a = 0; a < n; ++a) center[a] = std::int64_t(std::floor(p[a] / side));
        const std::int64_t width = std::min<std::int64_t>(2 * reach + 1, per);
        std::int64_t count = 1;
        for (int a = 0; a < n; ++a) count *= width;
        out.reserve(count);
        for (std::int64_t c = 0; c < count; ++c) {
            std::int64_t rem = c;
            IndexX k(n);
            for (int a = n - 1; a >= 0; --a) {
                k[a] = center[a] + (rem % width) - width / 2;
                rem /= width;
                k[a] = ((k[a] % per) + per) % per;
            }
            out.push_back(DyadicCube{nu, k});
        }
        return out;
    };

    Complex acc(0, 0);
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
        std::vector<DyadicCube> qs = candidates(x, nu);
        const CArray& ptab = psi_tables[nu - lattice.nu_min()];
        const std::int64_t sq = lattice.samples_per_side(nu);
        for (int mu = lattice.nu_min(); mu <= lattice.nu_max(); ++mu) {
            std::vector<DyadicCube> ps = candidates(y, mu);
            const CArray& ftab = phi_tables[mu - lattice.nu_min()];
            const std::int64_t sp = lattice.samples_per_side(mu);
            IndexX idx(n);
            for (const DyadicCube& q : qs) {
                for (int a = 0; a < n; ++a) idx[a] = q.k[a] * sq;
                const Complex psi_val = ptab[g.flatten(idx)];
                if (psi_val == Complex(0, 0)) continue;
                for (const DyadicCube& p : ps) {
                    const Complex e = entry(q, p);
                    if (e == Complex(0, 0)) continue;
                    for (int a = 0; a < n; ++a) idx[a] = p.k[a] * sp;
                    acc += e * ftab[g.flatten(idx)] * psi_val;
                }
            }
        }
    }
    return acc;
}

}  // namespace

Complex synthesize_kernel(const OperatorMatrix& A, const LittlewoodPaleyPair& pair,
                          const PointX& x, const PointX& y, double radius_in_sides) {
    const TruncatedLattice& lat = A.lattice;
    return synthesize_impl(
        lat, pair,
        [&](const DyadicCube& q, const DyadicCube& p) {
            return A.entries(lat.index_of(q), lat.index_of(p));
        },
        x, y, radius_in_sides);
}

Complex synthesize_kernel_fn(const TruncatedLattice& lattice, const LittlewoodPaleyPair& pair,
                             const std::function<Complex(const DyadicCube&, const DyadicCube&)>& entry,
                             const PointX& x, const PointX& y, double radius_in_sides) {
    return synthesize_impl(lattice, pair, entry, x, y, radius_in_sides);
}

SampledField uncovered_multiplier_remnant(const Operator& T, const LittlewoodPaleyPair& pair,
                                          const TruncatedLattice& lattice) {
    const GridSpec& g = lattice.grid();
    CArray spec = CArray::Zero(g.total_samples());
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        const double r = g.mode_radius(i);
        if (r == 0.0) continue;
        double part = 0.0;
        for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
            const double rr = std::ldexp(r, -nu);
            part += pair.phi_hat(rr) * pair.psi_hat(rr);
        }
        const double weight = 1.0 - part * part;
        if (weight == 0.0) continue;
        Complex m;
        if (!T.multiplier_value(g.mode_point(i), m))
            throw std::invalid_argument("uncovered_multiplier_remnant: multiplier backend needed");
        // F-series weight matching the synthesized double sum's normalization
        spec[i] = std::pow(2.0 * M_PI, -0.5 * g.dimension) * m * weight;
    }
    return SampledField::from_spectrum(g, std::move(spec));
}

RieszCalibration calibrate_riesz_constant(const GridSpec& grid, double s) {
    if (grid.dimension < 2)
        throw std::invalid_argument("calibrate_riesz_constant: needs dimension >= 2");
    const int n = grid.dimension;

    // unit-mass impulse; I^s applied to it is the multiplier kernel itself
    CArray imp = CArray::Zero(grid.total_samples());
    imp[0] = std::pow(grid.spacing(), -n);
    SampledField impulse = SampledField::from_space(grid, std::move(imp));
    SampledField kernel = riesz_potential(s).apply(impulse);

    RieszCalibration cal;
    cal.window_lo = 4.0 * grid.spacing();
    cal.window_hi = grid.box_side / 8.0;

    cal.exponent = s - n;
    // least squares for k(d) ~ c d^{s-n} + b0 + b2 d^2 over the window
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    PointX origin = PointX::Zero(n);
    std::int64_t used = 0;
    for (std::int64_t i = 0; i < grid.total_samples(); ++i) {
        const double d = grid.torus_distance(grid.sample_point(i), origin);
        if (d < cal.window_lo || d > cal.window_hi) continue;
        Eigen::Vector3d row(std::pow(d, s - n), 1.0, d * d);
        ata += row * row.transpose();
        atb += row * kernel.space()[i].real();
        ++used;
    }
    if (used < 16) throw std::domain_error("calibrate_riesz_constant: window too small");
    Eigen::Vector3d sol = ata.ldlt().solve(atb);
    cal.constant = sol[0];
    cal.background = sol[1];
    cal.background_quad = sol[2];

    double err2 = 0.0, ref2 = 0.0;
    for (std::int64_t i = 0; i < grid.total_samples(); ++i) {
        const double d = grid.torus_distance(grid.sample_point(i), origin);
        if (d < cal.window_lo || d > cal.window_hi) continue;
        const double have = kernel.space()[i].real();
        err2 += (have - cal.model(d)) * (have - cal.model(d));
        ref2 += std::pow(cal.constant * std::pow(d, s - n), 2);
    }
    cal.residual = std::sqrt(err2 / ref2);
    if (cal.residual > 0.05)
        throw std::domain_error("calibrate_riesz_constant: fit residual " +
                                std::to_string(cal.residual) + " exceeds 5%");
    return cal;
}

ZeroOperatorVerdict zero_operator_sanity(const OperatorMatrix& A, const LittlewoodPaleyPair& pair,
                                         double op_tol, double kernel_tol) {
    ZeroOperatorVerdict v;
    const TruncatedLattice& lat = A.lattice;
    const GridSpec& g = lat.grid();

    // || T psi_P ||_inf <= ||sum_Q A_{QP} phi... the matrix columns applied
    // through the synthesis give the field T psi_P restricted to the frame;
    // measure through the synthesized fields
    for (std::int64_t pi = 0; pi < lat.cube_count(); ++pi) {
        CoefficientSequence col{lat, A.entries.col(pi)};
        SampledField tpsi = synthesize(col, pair, Family::Psi);
        v.max_application = std::max(v.max_application, lp_norm(tpsi, INFINITY));
        if (v.max_application > op_tol) break;
    }
    v.operator_vanishes = v.max_application <= op_tol;

    // sampled off-diagonal kernel values
    PointX x(g.dimension), y(g.dimension);
    for (int t = 1; t <= 8; ++t) {
        for (int a = 0; a < g.dimension; ++a) {
            x[a] = std::floor(g.box_side * 0.5 / g.spacing()) * g.spacing();
            y[a] = x[a];
        }
        y[0] += t * 2.0 * g.spacing();
        v.max_kernel_value =
            std::max(v.max_kernel_value, std::abs(synthesize_kernel(A, pair, x, y)));
    }
    v.pass = !v.operator_vanishes || v.max_kernel_value <= kernel_tol;
    return v;
}

}  // namespace phikit
