#include <phikit/almost_diag.hpp>

#include <phikit/fft.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace phikit {

double big_w(int dimension, double side_p, double side_q, double distance, double beta,
             double gamma) {
    if (!(beta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("big_w: beta and gamma must be positive");
    const double nu = -std::log2(side_q), mu = -std::log2(side_p);
    const double scale_factor = std::pow(2.0, -std::abs(nu - mu) * (dimension + gamma) / 2.0);
    const double lmax = std::max(side_p, side_q);
    return scale_factor * std::pow(1.0 + distance / lmax, -(dimension + beta));
}

double big_w(const GridSpec& grid, const DyadicCube& p, const DyadicCube& q, double beta,
             double gamma) {
    CubeGeometry geo = cube_geometry(grid, p, q);
    return big_w(grid.dimension, p.side(), q.side(), geo.distance, beta, gamma);
}

double omega(int dimension, double side_p, double side_q, double distance, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("omega: eps must be positive");
    return std::min(side_p, side_q) * big_w(dimension, side_p, side_q, distance, eps, eps);
}

double omega(const GridSpec& grid, const DyadicCube& p, const DyadicCube& q, double eps) {
    CubeGeometry geo = cube_geometry(grid, p, q);
    return omega(grid.dimension, p.side(), q.side(), geo.distance, eps);
}

namespace {

constexpr std::int64_t kDenseMatrixCubeLimit = 3000;

void require_dense_size(const TruncatedLattice& lat) {
    if (lat.cube_count() > kDenseMatrixCubeLimit)
        throw std::domain_error(
            "dense operator matrix refused: " + std::to_string(lat.cube_count()) +
            " cubes exceed the dense limit; use the convolution/streaming paths");
}

// Per-scale-pair difference table for convolution-type (multiplier) T:
// A(Q, P) = |P Q|^{1/2} (2 pi / L)^n sum_m m_T psi^(2^-mu xi) phi^(2^-nu xi)
//           exp(-i (x_P - x_Q) xi_m)
// i.e. a forward DFT of the masked symbol read at the difference vector.
CArray convolution_band_table(const Operator& T, const LittlewoodPaleyPair& pair,
                              const GridSpec& g, int nu_q, int mu_p) {
    const std::int64_t total = g.total_samples();
    const int n = g.dimension;
    const double conv2 = std::pow(2.0 * M_PI, -double(n));  // two profile factors
    CArray table(total);
    for (std::int64_t i = 0; i < total; ++i) {
        const double r = g.mode_radius(i);
        const double pv = pair.psi_hat(std::ldexp(r, -mu_p));
        const double fv = pair.phi_hat(std::ldexp(r, -nu_q));
        if (pv == 0.0 || fv == 0.0) {
            table[i] = 0.0;
            continue;
        }
        Complex m;
        if (!T.multiplier_value(g.mode_point(i), m))
            throw std::invalid_argument("convolution fast path requires a multiplier backend");
        table[i] = conv2 * m * pv * fv;
    }
    detail::dft(g, table, /*inverse=*/false);
    const double amp = std::pow(std::ldexp(1.0, -mu_p), 0.5 * n) *
                       std::pow(std::ldexp(1.0, -nu_q), 0.5 * n) *
                       std::pow(g.mode_spacing(), n);
    table *= amp;
    return table;
}

}  // namespace

OperatorMatrix build_matrix(const Operator& T, const LittlewoodPaleyPair& pair,
                            const TruncatedLattice& lattice, MatrixFamilies fams) {
    require_dense_size(lattice);
    const std::int64_t count = lattice.cube_count();
    OperatorMatrix A{lattice, Eigen::MatrixXcd(count, count), T.describe(), pair.profile_hash()};
    for (std::int64_t pi = 0; pi < count; ++pi) {
        SampledField applied = T.apply(cube_field(pair, fams.applied, lattice.cube(pi)));
        A.entries.col(pi) = analyze(applied, pair, lattice, fams.paired).values;
    }
    return A;
}

OperatorMatrix build_matrix_convolution(const Operator& T, const LittlewoodPaleyPair& pair,
                                        const TruncatedLattice& lattice) {
    require_dense_size(lattice);
    const GridSpec& g = lattice.grid();
    const std::int64_t count = lattice.cube_count();
    OperatorMatrix A{lattice, Eigen::MatrixXcd::Zero(count, count), T.describe(),
                     pair.profile_hash()};
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
        for (int mu = lattice.nu_min(); mu <= lattice.nu_max(); ++mu) {
            if (std::abs(nu - mu) >= 2) continue;  // annular supports are disjoint
            CArray table = convolution_band_table(T, pair, g, nu, mu);
            const std::int64_t sq = lattice.samples_per_side(nu);
            const std::int64_t sp = lattice.samples_per_side(mu);
            const std::int64_t base_q = lattice.scale_offset(nu);
            const std::int64_t base_p = lattice.scale_offset(mu);
            const std::int64_t nq = lattice.cubes_at_scale(nu), np = lattice.cubes_at_scale(mu);
            const std::int64_t per_q = lattice.cubes_per_axis(nu), per_p = lattice.cubes_per_axis(mu);
            IndexX diff(g.dimension);
            for (std::int64_t qi = 0; qi < nq; ++qi) {
                std::int64_t remq = qi;
                IndexX kq(g.dimension);
                for (int a = g.dimension - 1; a >= 0; --a) { kq[a] = remq % per_q; remq /= per_q; }
                for (std::int64_t pi = 0; pi < np; ++pi) {
                    std::int64_t remp = pi;
                    IndexX kp(g.dimension);
                    for (int a = g.dimension - 1; a >= 0; --a) { kp[a] = remp % per_p; remp /= per_p; }
                    for (int a = 0; a < g.dimension; ++a) diff[a] = kp[a] * sp - kq[a] * sq;
                    A.entries(base_q + qi, base_p + pi) = table[g.flatten(diff)];
                }
            }
        }
    }
    return A;
}

ConvolutionMatrixTables::ConvolutionMatrixTables(const Operator& T,
                                                 const LittlewoodPaleyPair& pair,
                                                 const TruncatedLattice& lattice)
    : lattice_(lattice) {
    const GridSpec& g = lattice.grid();
    const int scales = lattice.scale_count();
    tables_.resize(std::size_t(scales) * scales);
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu)
        for (int mu = lattice.nu_min(); mu <= lattice.nu_max(); ++mu) {
            if (std::abs(nu - mu) >= 2) continue;
            tables_[std::size_t(nu - lattice.nu_min()) * scales + (mu - lattice.nu_min())] =
                convolution_band_table(T, pair, g, nu, mu);
        }
}

Complex ConvolutionMatrixTables::entry(const DyadicCube& q, const DyadicCube& p) const {
    if (std::abs(q.nu - p.nu) >= 2) return Complex(0, 0);
    const GridSpec& g = lattice_.grid();
    const int scales = lattice_.scale_count();
    const CArray& table =
        tables_[std::size_t(q.nu - lattice_.nu_min()) * scales + (p.nu - lattice_.nu_min())];
    const std::int64_t sq = lattice_.samples_per_side(q.nu);
    const std::int64_t sp = lattice_.samples_per_side(p.nu);
    IndexX diff(g.dimension);
    for (int a = 0; a < g.dimension; ++a) diff[a] = p.k[a] * sp - q.k[a] * sq;
    return table[g.flatten(diff)];
}

OperatorMatrix omega_majorized_matrix(const LittlewoodPaleyPair& pair,
                                      const TruncatedLattice& lattice, double eps) {
    require_dense_size(lattice);
    const std::int64_t count = lattice.cube_count();
    OperatorMatrix A{lattice, Eigen::MatrixXcd(count, count),
                     "omega_majorant(eps=" + std::to_string(eps) + ")", pair.profile_hash()};
    for (std::int64_t qi = 0; qi < count; ++qi) {
        DyadicCube q = lattice.cube(qi);
        for (std::int64_t pi = 0; pi < count; ++pi) {
            A.entries(qi, pi) = omega(lattice.grid(), lattice.cube(pi), q, eps);
        }
    }
    return A;
}

namespace {

class MatrixBackend final : public OperatorBackend {
  public:
    MatrixBackend(OperatorMatrix A, std::shared_ptr<const LittlewoodPaleyPair> pair,
                  bool transposed)
        : A_(std::move(A)), pair_(std::move(pair)), transposed_(transposed) {}

    SampledField apply(const SampledField& f) const override {
        const TruncatedLattice& lat = A_.lattice;
        if (!transposed_) {
            CoefficientSequence c = analyze(f, *pair_, lat, Family::Phi);
            CoefficientSequence out{lat, A_.entries * c.values};
            return synthesize(out, *pair_, Family::Psi);
        }
        CoefficientSequence c = analyze(f, *pair_, lat, Family::Psi);
        CoefficientSequence out{lat, A_.entries.transpose() * c.values};
        return synthesize(out, *pair_, Family::Phi);
    }

    std::shared_ptr<const OperatorBackend> transpose() const override {
        return std::make_shared<MatrixBackend>(A_, pair_, !transposed_);
    }

    std::string describe() const override {
        return "matrix(" + A_.provenance + (transposed_ ? ")^t" : ")");
    }

  private:
    OperatorMatrix A_;
    std::shared_ptr<const LittlewoodPaleyPair> pair_;
    bool transposed_;
};

}  // namespace

Operator matrix_operator(const OperatorMatrix& A, const LittlewoodPaleyPair& pair) {
    if (A.lattice.grid() != pair.grid())
        throw std::invalid_argument("matrix_operator: lattice/pair grid mismatch");
    return Operator(std::make_shared<MatrixBackend>(
        A, std::make_shared<LittlewoodPaleyPair>(pair), false));
}

namespace {

const std::vector<double>& eps_grid() {
    static const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
    return grid;
}

}  // namespace

AdpVerdict adp_verdict(const OperatorMatrix& A, double eps) {
    const TruncatedLattice& lat = A.lattice;
    const GridSpec& g = lat.grid();
    AdpVerdict v;
    v.eps = eps;

    auto ratio_at = [&](double e, DyadicCube* wq, DyadicCube* wp) {
        double best = 0.0;
        for (std::int64_t qi = 0; qi < lat.cube_count(); ++qi) {
            DyadicCube q = lat.cube(qi);
            for (std::int64_t pi = 0; pi < lat.cube_count(); ++pi) {
                const double a = std::abs(A.entries(qi, pi));
                if (a == 0.0) continue;
                DyadicCube p = lat.cube(pi);
                const double r = a / omega(g, p, q, e);
                if (r > best) {
                    best = r;
                    if (wq) *wq = q;
                    if (wp) *wp = p;
                }
            }
        }
        return best;
    };

    v.ratio = ratio_at(eps, &v.witness_q, &v.witness_p);
    double prev = -1.0;
    for (double e : eps_grid()) {
        const double r = ratio_at(e, nullptr, nullptr);
        v.eps_profile.emplace_back(e, r);
        if (prev >= 0.0 && r < prev * (1.0 - 1e-12)) v.monotone_in_eps = false;
        prev = r;
    }
    return v;
}

AdpVerdict adp_verdict_convolution(const Operator& T, const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice, double eps) {
    const GridSpec& g = lattice.grid();
    const int n = g.dimension;
    AdpVerdict v;
    v.eps = eps;
    std::vector<double> profile(eps_grid().size(), 0.0);

    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
        for (int mu = lattice.nu_min(); mu <= lattice.nu_max(); ++mu) {
            if (std::abs(nu - mu) >= 2) continue;
            CArray table = convolution_band_table(T, pair, g, nu, mu);
            const double side_q = std::ldexp(1.0, -nu), side_p = std::ldexp(1.0, -mu);
            // realizable differences form the sub-lattice of stride
            // min(samples_per_side) along each axis
            const std::int64_t stride = std::min(lattice.samples_per_side(nu),
                                                 lattice.samples_per_side(mu));
            const std::int64_t N = g.samples_per_axis;
            std::vector<std::int64_t> offsets;
            for (std::int64_t t = 0; t < N; t += stride) offsets.push_back(t);
            IndexX idx(n);
            std::vector<std::int64_t> cursor(n, 0);
            const std::int64_t per = std::int64_t(offsets.size());
            std::int64_t totald = 1;
            for (int a = 0; a < n; ++a) totald *= per;
            for (std::int64_t c = 0; c < totald; ++c) {
                std::int64_t rem = c;
                for (int a = n - 1; a >= 0; --a) { idx[a] = offsets[rem % per]; rem /= per; }
                const double a_val = std::abs(table[g.flatten(idx)]);
                if (a_val == 0.0) continue;
                PointX d(n);
                for (int a = 0; a < n; ++a) d[a] = g.centered(idx[a] * g.spacing());
                const double dist = d.norm();
                for (std::size_t ei = 0; ei < eps_grid().size(); ++ei) {
                    const double r = a_val / omega(n, side_p, side_q, dist, eps_grid()[ei]);
                    profile[ei] = std::max(profile[ei], r);
                }
                const double r = a_val / omega(n, side_p, side_q, dist, eps);
                if (r > v.ratio) {
                    v.ratio = r;
                    v.witness_q = DyadicCube{nu, IndexX::Zero(n)};
                    IndexX kp(n);
                    for (int a = 0; a < n; ++a)
                        kp[a] = idx[a] / lattice.samples_per_side(mu);
                    v.witness_p = DyadicCube{mu, kp};
                }
            }
        }
    }
    double prev = -1.0;
    for (std::size_t ei = 0; ei < eps_grid().size(); ++ei) {
        v.eps_profile.emplace_back(eps_grid()[ei], profile[ei]);
        if (prev >= 0.0 && profile[ei] < prev * (1.0 - 1e-12)) v.monotone_in_eps = false;
        prev = profile[ei];
    }
    return v;
}

double max_off_band_entry(const Operator& T, const LittlewoodPaleyPair& pair,
                          const TruncatedLattice& lattice) {
    const GridSpec& g = lattice.grid();
    double worst = 0.0;
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu)
        for (int mu = lattice.nu_min(); mu <= lattice.nu_max(); ++mu) {
            if (std::abs(nu - mu) < 2) continue;
            CArray table = convolution_band_table(T, pair, g, nu, mu);
            worst = std::max(worst, table.abs().maxCoeff());
        }
    return worst;
}

DecayCheckReport lemma41_decay_check(const Operator& T, const LittlewoodPaleyPair& pair,
                                     const DyadicCube& q, double delta, double slope_from) {
    const GridSpec& g = pair.grid();
    const int n = g.dimension;
    DecayCheckReport rep;

    // band-edge warning: the cube's annulus within one scale of the band ends
    const double fund = g.mode_spacing(), top = 0.9 * g.nyquist();
    if (std::ldexp(1.0, q.nu - 2) <= fund || std::ldexp(1.0, q.nu + 2) >= top)
        rep.edge_warning = true;

    const double lq = q.side();
    const double amp = lq * std::pow(q.volume(n), -0.5);  // l(Q) |Q|^{-1/2}
    const PointX xq = q.corner();

    SampledField tpsi = T.apply(cube_field(pair, Family::Psi, q));
    SampledField ttphi = T.transpose().apply(cube_field(pair, Family::Phi, q));

    const double window_hi = 0.4 * g.box_side / lq;
    rep.slope_window_lo = slope_from;
    rep.slope_window_hi = window_hi;

    // dyadic shells in normalized distance
    const int shell_count = std::max(2, int(std::floor(std::log2(window_hi / slope_from))) + 1) * 2;
    std::vector<double> shell_max(shell_count, 0.0);
    const double shell_step = std::pow(window_hi / slope_from, 1.0 / shell_count);

    for (const SampledField* fld : {&tpsi, &ttphi}) {
        for (std::int64_t i = 0; i < g.total_samples(); ++i) {
            PointX x = g.sample_point(i);
            const double d = g.torus_distance(x, xq) / lq;  // normalized
            const double env = amp * std::pow(1.0 + d, -(n + delta));
            const double val = std::abs(fld->space()[i]);
            if (!std::isfinite(val)) rep.bound_holds = false;
            rep.fitted_constant = std::max(rep.fitted_constant, val / env);
            if (fld == &tpsi) {
                rep.near_field_constant = std::max(rep.near_field_constant, val / amp);
                if (d >= slope_from && d < window_hi) {
                    int shell = int(std::log(d / slope_from) / std::log(shell_step));
                    shell = std::clamp(shell, 0, shell_count - 1);
                    shell_max[shell] = std::max(shell_max[shell], val);
                }
            }
        }
    }

    // least squares slope of log(shell max) vs log(shell center)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (int t = 0; t < shell_count; ++t) {
        if (shell_max[t] <= 0.0) continue;
        const double xc = std::log(slope_from * std::pow(shell_step, t + 0.5));
        const double yc = std::log(shell_max[t]);
        sx += xc; sy += yc; sxx += xc * xc; sxy += xc * yc;
        ++used;
    }
    rep.far_slope = used >= 2 ? (used * sxy - sx * sy) / (used * sxx - sx * sx) : 0.0;
    if (!std::isfinite(rep.fitted_constant)) rep.bound_holds = false;
    return rep;
}

ConvolutionDecayReport lemma45_convolution_check(const SampledField& g_fld,
                                                 const SampledField& h_fld, int nu, int mu,
                                                 double delta, const PointX& x1) {
    if (nu > mu) throw std::invalid_argument("lemma45: requires nu <= mu");
    if (!(delta > 0.0)) throw std::invalid_argument("lemma45: requires delta > 0");
    const GridSpec& grid = g_fld.grid();
    if (grid != h_fld.grid()) throw std::invalid_argument("lemma45: grid mismatch");
    const int n = grid.dimension;
    ConvolutionDecayReport rep;

    // zero mean hypothesis on h
    const double h_scale = h_fld.space().abs().maxCoeff();
    const Complex h_mean = h_fld.spectrum()[0];
    if (std::abs(h_mean) > 1e-10 * std::max(h_scale, 1e-300))
        throw std::domain_error("lemma45: h must have zero mean");

    // fitted envelope constants (4.6) and (4.8)
    PointX origin = PointX::Zero(n);
    for (std::int64_t i = 0; i < grid.total_samples(); ++i) {
        PointX x = grid.sample_point(i);
        const double dg = grid.torus_distance(x, origin);
        const double envg = std::pow(2.0, 0.5 * n * nu) *
                            std::pow(1.0 + std::ldexp(dg, nu), -(n + delta));
        rep.c_g = std::max(rep.c_g, std::abs(g_fld.space()[i]) / envg);
        const double dh = grid.torus_distance(x, x1);
        const double envh = std::pow(2.0, 0.5 * n * mu) *
                            std::pow(1.0 + std::ldexp(dh, mu), -(n + delta));
        rep.c_h = std::max(rep.c_h, std::abs(h_fld.space()[i]) / envh);
    }

    // Hoelder-type difference estimate (4.7) on sampled displacement pairs
    std::mt19937_64 rng(45);
    const std::int64_t total = grid.total_samples();
    for (int t = 0; t < 2048; ++t) {
        const std::int64_t i = std::int64_t(rng() % std::uint64_t(total));
        const std::int64_t j = std::int64_t(rng() % std::uint64_t(total));
        if (i == j) continue;
        PointX x = grid.sample_point(i), y = grid.sample_point(j);
        const double dxy = grid.torus_distance(x, y);
        if (dxy == 0.0) continue;
        // sup over |z| <= |x-y| of (1 + 2^nu |z - x|)^{-(n+delta)}: the
        // decreasing profile peaks at the point of the ball closest to x
        const double dist_x = grid.torus_distance(x, origin);
        const double closest = std::max(0.0, dist_x - dxy);
        const double sup_env = std::pow(1.0 + std::ldexp(closest, nu), -(n + delta));
        const double env = std::pow(2.0, nu * (0.5 * n + 0.5 * delta)) *
                           std::pow(dxy, 0.5 * delta) * sup_env;
        const double diff = std::abs(g_fld.space()[i] - g_fld.space()[j]);
        rep.c_g_diff = std::max(rep.c_g_diff, diff / env);
    }

    // g * h on the grid, against the transferred envelope
    const double c = std::pow(2.0 * M_PI, 0.5 * n);
    CArray spec(total);
    for (std::int64_t i = 0; i < total; ++i)
        spec[i] = c * g_fld.spectrum()[i] * h_fld.spectrum()[i];
    SampledField conv = SampledField::from_spectrum(grid, std::move(spec));

    const double gain = std::pow(2.0, -(mu - nu) * (0.5 * n + 0.5 * delta));
    for (std::int64_t i = 0; i < total; ++i) {
        PointX x = grid.sample_point(i);
        const double d = grid.torus_distance(x, x1);
        const double env = gain * std::pow(1.0 + std::ldexp(d, nu), -(n + delta));
        rep.fitted_constant = std::max(rep.fitted_constant, std::abs(conv.space()[i]) / env);
    }
    // peak at x1 (nearest sample)
    IndexX nearest(n);
    for (int a = 0; a < n; ++a)
        nearest[a] = std::int64_t(std::llround(x1[a] / grid.spacing()));
    rep.peak = std::abs(conv.space()[grid.flatten(nearest)]);
    rep.hypotheses_ok = true;
    return rep;
}

std::vector<DyadicCube> GeometricLattice::cubes() const {
    std::vector<DyadicCube> out;
    for (int nu = nu_min; nu <= nu_max; ++nu) {
        const std::int64_t per = box_side * (std::int64_t(1) << std::max(0, nu));
        if (nu < 0) throw std::invalid_argument("GeometricLattice: nu_min must be >= 0");
        std::int64_t count = 1;
        for (int a = 0; a < dimension; ++a) count *= per;
        for (std::int64_t c = 0; c < count; ++c) {
            std::int64_t rem = c;
            IndexX k(dimension);
            for (int a = dimension - 1; a >= 0; --a) { k[a] = rem % per; rem /= per; }
            out.push_back(DyadicCube{nu, k});
        }
    }
    return out;
}

double GeometricLattice::distance(const DyadicCube& p, const DyadicCube& q) const {
    double s = 0.0;
    for (int a = 0; a < dimension; ++a) {
        double d = std::ldexp(double(p.k[a]), -p.nu) - std::ldexp(double(q.k[a]), -q.nu);
        d = std::fmod(d, double(box_side));
        if (d < 0) d += double(box_side);
        if (d >= double(box_side) / 2) d -= double(box_side);
        s += d * d;
    }
    return std::sqrt(s);
}

ProductBoundReport lemma51_product_check(double beta, double gamma1, double gamma2,
                                         const std::vector<GeometricLattice>& ladder,
                                         double stability_tol, std::uint64_t seed) {
    if (!(beta > 0.0) || !(gamma1 > 0.0) || !(gamma2 > 0.0))
        throw std::invalid_argument("lemma51: beta, gamma1, gamma2 must be positive");
    if (gamma1 == gamma2) throw std::invalid_argument("lemma51: requires gamma1 != gamma2");
    if (!(gamma1 + gamma2 > 2.0 * beta))
        throw std::invalid_argument("lemma51: requires gamma1 + gamma2 > 2 beta");

    ProductBoundReport rep;
    (void)seed;
    for (const GeometricLattice& lat : ladder) {
        std::vector<DyadicCube> cubes = lat.cubes();
        double worst = 0.0;
        // deterministic pair set with geometry common to every ladder member:
        // all scale combinations, separations 0..2 cells along the first axis
        for (int s1 = lat.nu_min; s1 <= lat.nu_max; ++s1) {
            for (int s2 = lat.nu_min; s2 <= lat.nu_max; ++s2) {
                for (int sep = 0; sep <= 2; ++sep) {
                    DyadicCube p{s1, IndexX::Zero(lat.dimension)};
                    DyadicCube q{s2, IndexX::Zero(lat.dimension)};
                    q.k[0] = sep * (std::int64_t(1) << s2);
                    double sum = 0.0;
                    for (const DyadicCube& r : cubes)
                        sum += big_w(lat.dimension, p.side(), r.side(), lat.distance(p, r), beta,
                                     gamma1) *
                               big_w(lat.dimension, r.side(), q.side(), lat.distance(r, q), beta,
                                     gamma2);
                    const double target = big_w(lat.dimension, p.side(), q.side(),
                                                lat.distance(p, q), beta,
                                                std::min(gamma1, gamma2));
                    worst = std::max(worst, sum / target);
                }
            }
        }
        rep.per_lattice.push_back(worst);
    }
    rep.max_ratio = *std::max_element(rep.per_lattice.begin(), rep.per_lattice.end());
    const double lo = *std::min_element(rep.per_lattice.begin(), rep.per_lattice.end());
    rep.stable = (rep.max_ratio - lo) <= stability_tol * rep.max_ratio;
    return rep;
}

ScaleSumReport lemma52_sum_check(double alpha, double beta, double eps,
                                 const std::vector<int>& truncations, double stability_tol) {
    if (!(beta > alpha) || !(alpha > 0.0))
        throw std::invalid_argument("lemma52: requires beta > alpha > 0");
    if (!(eps > 0.0)) throw std::invalid_argument("lemma52: requires eps > 0");

    ScaleSumReport rep;
    for (int J : truncations) {
        double worst = 0.0;
        for (int li = 0; li <= 20; ++li) {
            const double lambda = std::pow(10.0, -1.0 + 2.0 * li / 20.0);  // two decades
            double sum = 0.0;
            for (int nu = -J; nu <= J; ++nu)
                for (int mu = -J; mu <= J; ++mu) {
                    const double smin = std::ldexp(1.0, std::min(nu, mu));
                    sum += std::pow(2.0, -std::abs(nu - mu) * eps) *
                           std::pow(2.0, std::min(nu, mu) * alpha) *
                           std::pow(1.0 + smin * lambda, -beta);
                }
            worst = std::max(worst, sum * std::pow(lambda, alpha));
        }
        rep.per_truncation.push_back(worst);
    }
    rep.max_constant = *std::max_element(rep.per_truncation.begin(), rep.per_truncation.end());
    const double lo = *std::min_element(rep.per_truncation.begin(), rep.per_truncation.end());
    rep.stable = (rep.max_constant - lo) <= stability_tol * rep.max_constant;
    return rep;
}

MatrixApplyReport matrix_apply_bound(const OperatorMatrix& A, const CoefficientSequence& s,
                                     double alpha, double p, double q) {
    MatrixApplyReport rep;
    rep.extrapolated_index = !(alpha >= -1.0 && alpha <= 0.0 && p >= 1.0 && q >= 1.0 &&
                               std::isfinite(p) && std::isfinite(q));
    CoefficientSequence out{A.lattice, A.entries * s.values};
    rep.source_norm = sequence_norm(s, SpaceIndex{alpha, p, q});
    rep.target_norm = sequence_norm(out, SpaceIndex{1.0 + alpha, p, q});
    rep.ratio = rep.source_norm == 0.0 ? 0.0 : rep.target_norm / rep.source_norm;
    return rep;
}

Eigen::VectorXcd omega_majorized_apply(const TruncatedLattice& lattice, double eps,
                                       const Eigen::VectorXcd& s) {
    const GridSpec& g = lattice.grid();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(lattice.cube_count());
    for (std::int64_t qi = 0; qi < lattice.cube_count(); ++qi) {
        DyadicCube q = lattice.cube(qi);
        Complex acc(0, 0);
        for (std::int64_t pi = 0; pi < lattice.cube_count(); ++pi)
            acc += omega(g, lattice.cube(pi), q, eps) * s[pi];
        out[qi] = acc;
    }
    return out;
}

void write_matrix(std::ostream& os, const OperatorMatrix& A) {
    const TruncatedLattice& lat = A.lattice;
    const GridSpec& g = lat.grid();
    char head[256];
    std::snprintf(head, sizeof head, "phikit-matrix dim %d box %.17g samples %d nu %d %d",
                  g.dimension, g.box_side, g.samples_per_axis, lat.nu_min(), lat.nu_max());
    os << head << " pair_hash " << A.pair_hash << " provenance " << A.provenance << '\n';
    char buf[320];
    for (std::int64_t qi = 0; qi < lat.cube_count(); ++qi) {
        DyadicCube q = lat.cube(qi);
        for (std::int64_t pi = 0; pi < lat.cube_count(); ++pi) {
            DyadicCube p = lat.cube(pi);
            int off = std::snprintf(buf, sizeof buf, "%d", q.nu);
            for (int a = 0; a < q.k.size(); ++a)
                off += std::snprintf(buf + off, sizeof buf - off, " %lld", (long long)q.k[a]);
            off += std::snprintf(buf + off, sizeof buf - off, " %d", p.nu);
            for (int a = 0; a < p.k.size(); ++a)
                off += std::snprintf(buf + off, sizeof buf - off, " %lld", (long long)p.k[a]);
            const Complex v = A.entries(qi, pi);
            std::snprintf(buf + off, sizeof buf - off, " %.17g %.17g", v.real(), v.imag());
            os << buf << '\n';
        }
    }
}

OperatorMatrix read_matrix(std::istream& is, const LittlewoodPaleyPair& pair,
                           const TruncatedLattice& lattice) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("phikit-matrix", 0) != 0)
        throw std::runtime_error("read_matrix: missing header");
    {
        std::istringstream hs(header);
        std::string tag, key;
        int dim, samples, nlo, nhi;
        double box;
        std::uint64_t hash;
        hs >> tag >> key >> dim >> key >> box >> key >> samples >> key >> nlo >> nhi >> key >> hash;
        if (!hs) throw std::runtime_error("read_matrix: malformed header");
        const GridSpec& g = lattice.grid();
        if (dim != g.dimension || samples != g.samples_per_axis || box != g.box_side ||
            nlo != lattice.nu_min() || nhi != lattice.nu_max())
            throw std::runtime_error("read_matrix: lattice spec mismatch");
        if (hash != pair.profile_hash())
            throw std::runtime_error("read_matrix: pair profile hash mismatch");
    }
    const int n = lattice.grid().dimension;
    OperatorMatrix A{lattice, Eigen::MatrixXcd::Zero(lattice.cube_count(), lattice.cube_count()),
                     "file", pair.profile_hash()};
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        DyadicCube q, p;
        q.k.resize(n);
        p.k.resize(n);
        double re, im;
        ss >> q.nu;
        for (int a = 0; a < n; ++a) ss >> q.k[a];
        ss >> p.nu;
        for (int a = 0; a < n; ++a) ss >> p.k[a];
        ss >> re >> im;
        if (!ss) throw std::runtime_error("read_matrix: malformed record: " + line);
        A.entries(lattice.index_of(q), lattice.index_of(p)) = Complex(re, im);
    }
    return A;
}

}  // namespace phikit
