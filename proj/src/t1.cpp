#include <phikit/t1.hpp>

#include <phikit/fft.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace phikit {

SampledField synthesize_mollifier(const CoefficientSequence& s, const Mollifier& moll) {
    const TruncatedLattice& lattice = s.lattice;
    const GridSpec& g = lattice.grid();
    const std::int64_t total = g.total_samples();
    const int n = g.dimension;
    const double conv = std::pow(2.0 * M_PI, -0.5 * n);

    CArray spec = CArray::Zero(total);
    CArray work(total);
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
        work.setZero();
        const std::int64_t stride = lattice.samples_per_side(nu);
        const std::int64_t per = lattice.cubes_per_axis(nu);
        const std::int64_t base = lattice.scale_offset(nu);
        for (std::int64_t c = 0; c < lattice.cubes_at_scale(nu); ++c) {
            std::int64_t rem = c;
            IndexX idx(n);
            for (int a = n - 1; a >= 0; --a) {
                idx[a] = (rem % per) * stride;
                rem /= per;
            }
            work[g.flatten(idx)] = s.values[base + c];
        }
        detail::dft(g, work, false);
        const double amp = std::pow(std::ldexp(1.0, -nu), 0.5 * n);
        for (std::int64_t i = 0; i < total; ++i) {
            const double p = moll.profile(std::ldexp(g.mode_radius(i), -nu));
            if (p != 0.0) spec[i] += conv * p * amp * work[i];
        }
    }
    return SampledField::from_spectrum(g, std::move(spec));
}

namespace {

SampledField constant_one(const GridSpec& g) {
    return SampledField::from_space(g, CArray::Constant(g.total_samples(), Complex(1.0, 0.0)));
}

}  // namespace

T1Result compute_t1(const Operator& T, const LittlewoodPaleyPair& pair,
                    const TruncatedLattice& lattice, double tolerance) {
    const GridSpec& g = pair.grid();
    SampledField t_one = T.apply(constant_one(g));
    T1Result out{analyze(t_one, pair, lattice, Family::Phi),
                 analyze(t_one, pair, lattice, Family::Psi),
                 {},
                 {},
                 {},
                 0,
                 tolerance};

    out.levels = max_regularizer_level(pair) + 1;
    out.ladder_phi.reserve(out.levels);
    out.ladder_psi.reserve(out.levels);
    for (int j = 0; j < out.levels; ++j) {
        SampledField t_eta = T.apply(regularizer(pair, j));
        out.ladder_phi.push_back(analyze(t_eta, pair, lattice, Family::Phi));
        out.ladder_psi.push_back(analyze(t_eta, pair, lattice, Family::Psi));
    }

    out.stabilized.assign(std::size_t(lattice.cube_count()), 0);
    if (out.levels > 0) {
        const auto& lphi = out.ladder_phi.back().values;
        const auto& lpsi = out.ladder_psi.back().values;
        for (std::int64_t i = 0; i < lattice.cube_count(); ++i) {
            const bool ok = std::abs(lphi[i] - out.limit_phi.values[i]) < tolerance &&
                            std::abs(lpsi[i] - out.limit_psi.values[i]) < tolerance;
            out.stabilized[std::size_t(i)] = ok ? 1 : 0;
        }
    }
    return out;
}

VanishingIntegralReport vanishing_integral_check(const Operator& T,
                                                 const LittlewoodPaleyPair& pair,
                                                 const TruncatedLattice& lattice, double tol) {
    const GridSpec& g = pair.grid();
    VanishingIntegralReport rep;
    // DC coefficient of T(psi_Q) equals (2 pi)^{-n/2} [psi_Q, T^t 1]; one
    // application of each side covers every cube
    const double scale = std::pow(2.0 * M_PI, -0.5 * g.dimension);
    SampledField t_one = T.apply(constant_one(g));
    SampledField tt_one = T.transpose().apply(constant_one(g));
    CoefficientSequence fwd = analyze(tt_one, pair, lattice, Family::Psi);
    CoefficientSequence bwd = analyze(t_one, pair, lattice, Family::Phi);
    for (std::int64_t i = 0; i < lattice.cube_count(); ++i) {
        const double f = scale * std::abs(fwd.values[i]);
        const double b = scale * std::abs(bwd.values[i]);
        if (f > rep.max_forward) {
            rep.max_forward = f;
            if (f >= b) rep.worst_cube = lattice.cube(i);
        }
        if (b > rep.max_transpose) {
            rep.max_transpose = b;
            if (b > f) rep.worst_cube = lattice.cube(i);
        }
    }
    rep.pass = rep.max_forward <= tol && rep.max_transpose <= tol;
    return rep;
}

namespace {

class ParaproductBackend final : public OperatorBackend {
  public:
    ParaproductBackend(CoefficientSequence coeffs,
                       std::shared_ptr<const LittlewoodPaleyPair> pair,
                       std::shared_ptr<const Mollifier> moll, bool transposed)
        : coeffs_(std::move(coeffs)), pair_(std::move(pair)), moll_(std::move(moll)),
          transposed_(transposed) {}

    SampledField apply(const SampledField& f) const override {
        const TruncatedLattice& lat = coeffs_.lattice;
        if (!transposed_) {
            CoefficientSequence s = analyze_mollifier(f, *moll_, lat);
            CoefficientSequence t{lat, coeffs_.values.cwiseProduct(s.values)};
            return synthesize(t, *pair_, Family::Psi);
        }
        CoefficientSequence s = analyze(f, *pair_, lat, Family::Psi);
        CoefficientSequence t{lat, coeffs_.values.cwiseProduct(s.values)};
        return synthesize_mollifier(t, *moll_);
    }

    std::shared_ptr<const OperatorBackend> transpose() const override {
        return std::make_shared<ParaproductBackend>(coeffs_, pair_, moll_, !transposed_);
    }

    std::string describe() const override {
        return transposed_ ? "paraproduct^t" : "paraproduct";
    }

  private:
    CoefficientSequence coeffs_;
    std::shared_ptr<const LittlewoodPaleyPair> pair_;
    std::shared_ptr<const Mollifier> moll_;
    bool transposed_;
};

}  // namespace

CoefficientSequence paraproduct_coefficients(const SampledField& b,
                                             const LittlewoodPaleyPair& pair,
                                             const TruncatedLattice& lattice) {
    CoefficientSequence c = analyze(b, pair, lattice, Family::Phi);
    for (std::int64_t i = 0; i < lattice.cube_count(); ++i) {
        const double vol = lattice.cube(i).volume(lattice.grid().dimension);
        c.values[i] *= std::pow(vol, -0.5);
    }
    return c;
}

Operator paraproduct(const SampledField& b, const LittlewoodPaleyPair& pair,
                     const Mollifier& moll, const TruncatedLattice& lattice) {
    if (b.grid() != pair.grid() || moll.grid != pair.grid())
        throw std::invalid_argument("paraproduct: grid mismatch");
    return Operator(std::make_shared<ParaproductBackend>(
        paraproduct_coefficients(b, pair, lattice),
        std::make_shared<LittlewoodPaleyPair>(pair), std::make_shared<Mollifier>(moll), false));
}

ParaproductShapeReport paraproduct_shape_check(const SampledField& b,
                                               const LittlewoodPaleyPair& pair,
                                               const Mollifier& moll,
                                               const TruncatedLattice& lattice,
                                               std::uint64_t seed) {
    ParaproductShapeReport rep;
    CoefficientSequence c = paraproduct_coefficients(b, pair, lattice);
    for (std::int64_t i = 0; i < lattice.cube_count(); ++i)
        rep.coefficient_bound =
            std::max(rep.coefficient_bound, std::abs(c.values[i]) / lattice.cube(i).side());

    // explicit diagonal action between mollifier analysis and psi synthesis
    Operator op = paraproduct(b, pair, moll, lattice);
    for (int trial = 0; trial < 4; ++trial) {
        SampledField f = random_band_limited(pair, lattice, seed + std::uint64_t(trial));
        SampledField direct = op.apply(f);
        CoefficientSequence s = analyze_mollifier(f, moll, lattice);
        Eigen::VectorXcd diag_applied(lattice.cube_count());
        for (std::int64_t i = 0; i < lattice.cube_count(); ++i)
            diag_applied[i] = c.values[i] * s.values[i];
        CoefficientSequence t{lattice, std::move(diag_applied)};
        SampledField via_matrix = synthesize(t, pair, Family::Psi);
        const double scale = std::max(1.0, lp_norm(direct, INFINITY));
        rep.offdiagonal_defect =
            std::max(rep.offdiagonal_defect, max_abs_difference(direct, via_matrix) / scale);
    }
    rep.diagonal = rep.offdiagonal_defect <= 1e-12;
    return rep;
}

T1Decomposition full_t1_decomposition(const Operator& T, const LittlewoodPaleyPair& pair,
                                      const Mollifier& moll, const TruncatedLattice& lattice,
                                      int consistency_samples, std::uint64_t seed) {
    const GridSpec& g = pair.grid();
    T1Result forward = compute_t1(T, pair, lattice);
    T1Result backward = compute_t1(T.transpose(), pair, lattice);
    T1Decomposition out{
        synthesize(forward.limit_phi, pair, Family::Psi),
        synthesize(backward.limit_phi, pair, Family::Psi),
        Operator(), Operator(), Operator(), {}, 0.0, false};
    if (forward.levels == 0 || backward.levels == 0) {
        out.refused = true;
        return out;
    }

    out.pi_a = paraproduct(out.a, pair, moll, lattice);
    out.pi_b_t = paraproduct(out.b, pair, moll, lattice).transpose();
    out.s = operator_sum({{Complex(1, 0), T},
                          {Complex(-1, 0), out.pi_a},
                          {Complex(-1, 0), out.pi_b_t}},
                         "t1-remainder");
    out.s_vanishing = vanishing_integral_check(out.s, pair, lattice);

    for (int t = 0; t < consistency_samples; ++t) {
        SampledField f = random_band_limited(pair, lattice, seed + std::uint64_t(t));
        SampledField want = T.apply(f);
        SampledField have = out.s.apply(f) + out.pi_a.apply(f) + out.pi_b_t.apply(f);
        const double denom = lp_norm(want, 2.0);
        if (denom == 0.0) continue;
        out.consistency = std::max(out.consistency, lp_norm(have - want, 2.0) / denom);
    }
    return out;
}

SharpnessReport sharpness_experiment(const Operator& T, const LittlewoodPaleyPair& pair,
                                     const TruncatedLattice& lattice) {
    SharpnessReport rep;
    // a level is measurable when the full stack of scales carrying T(eta^j)
    // lies inside the lattice window: content sits at scales ~ -j, reaching
    // one scale below, so j <= -nu_min - 1
    const int levels =
        std::min(max_regularizer_level(pair) + 1, -lattice.nu_min());
    const SpaceIndex proxy{1.0, std::numeric_limits<double>::infinity(), 2.0};
    for (int j = 0; j < levels; ++j)
        rep.norms.push_back(tl_norm(T.apply(regularizer(pair, j)), proxy, pair, lattice));
    rep.conclusive = levels >= 3;
    if (rep.conclusive) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int used = 0;
        for (int j = 0; j < levels; ++j) {
            if (rep.norms[j] <= 0.0) continue;
            const double y = std::log2(rep.norms[j]);
            sx += j;
            sy += y;
            sxx += double(j) * j;
            sxy += j * y;
            ++used;
        }
        rep.conclusive = used >= 3;
        if (rep.conclusive)
            rep.log_slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    }
    rep.uniform = rep.conclusive && std::abs(rep.log_slope) <= 0.05;
    return rep;
}

void SparseSpectrum::add(const IndexX& mode, Complex value) {
    std::array<std::int64_t, kMaxDim> key{};
    for (int a = 0; a < dim_; ++a) key[std::size_t(a)] = mode[a];
    data_[key] += value;
}

Complex SparseSpectrum::at(const IndexX& mode) const {
    std::array<std::int64_t, kMaxDim> key{};
    for (int a = 0; a < dim_; ++a) key[std::size_t(a)] = mode[a];
    auto it = data_.find(key);
    return it == data_.end() ? Complex(0, 0) : it->second;
}

PointX SparseSpectrum::xi(const std::array<std::int64_t, kMaxDim>& key) const {
    PointX out(dim_);
    for (int a = 0; a < dim_; ++a) out[a] = key[std::size_t(a)] * mode_spacing();
    return out;
}

SparseSpectrum coherent_band_family(int dimension, double box_side, int bands,
                                    double bump_width) {
    SparseSpectrum f(dimension, box_side);
    const double spacing = 2.0 * M_PI / box_side;
    const double center_unit = 1.0 / spacing;  // modes per unit frequency
    if (std::abs(center_unit - std::round(center_unit)) > 1e-9)
        throw std::invalid_argument("coherent_band_family: e_1 must lie on the mode lattice");
    const std::int64_t unit = std::int64_t(std::llround(center_unit));
    const std::int64_t reach = std::int64_t(std::ceil(bump_width / spacing));

    for (int band = 1; band <= bands; ++band) {
        const std::int64_t center = unit << band;  // 2^band e_1 in mode units
        const double weight = std::ldexp(1.0, band);
        // identical envelope for every band: smooth radial bump of the given
        // width (coherence of the demodulated sum relies on this)
        std::int64_t count = 1;
        for (int a = 0; a < dimension; ++a) count *= (2 * reach + 1);
        for (std::int64_t c = 0; c < count; ++c) {
            std::int64_t rem = c;
            IndexX m(dimension);
            for (int a = dimension - 1; a >= 0; --a) {
                m[a] = (rem % (2 * reach + 1)) - reach;
                rem /= (2 * reach + 1);
            }
            double r2 = 0.0;
            for (int a = 0; a < dimension; ++a) r2 += double(m[a]) * double(m[a]);
            const double r = std::sqrt(r2) * spacing / bump_width;
            if (r >= 1.0) continue;
            const double env = std::exp(-1.0 / (1.0 - r * r));
            IndexX mode = m;
            mode[0] += center;
            f.add(mode, weight * env);
        }
    }
    return f;
}

SparseSpectrum apply_modulated_symbol(const SparseSpectrum& f, const LittlewoodPaleyPair& pair) {
    if (!pair.counterexample_mode())
        throw std::invalid_argument("apply_modulated_symbol: counterexample pair required");
    SparseSpectrum out(f.dimension(), f.box_side());
    const double spacing = f.mode_spacing();
    const double unit = 1.0 / spacing;
    const std::int64_t unit_modes = std::int64_t(std::llround(unit));
    const double conv = std::pow(2.0 * M_PI, -0.5 * f.dimension());

    for (const auto& [key, value] : f.entries()) {
        PointX xi = f.xi(key);
        const double r = xi.norm();
        if (r == 0.0) continue;
        // scales whose annulus reaches this mode
        const int lo = int(std::floor(std::log2(r / pair.profile().r3)));
        const int hi = int(std::ceil(std::log2(r / pair.profile().r0)));
        for (int nu = lo; nu <= hi; ++nu) {
            const double p = pair.phi_hat(std::ldexp(r, -nu));
            if (p == 0.0) continue;
            IndexX shifted(f.dimension());
            for (int a = 0; a < f.dimension(); ++a) shifted[a] = key[std::size_t(a)];
            shifted[0] -= unit_modes << std::max(nu, 0);
            if (nu < 0) throw std::domain_error("apply_modulated_symbol: negative band");
            out.add(shifted, conv * std::ldexp(1.0, -nu) * p * value);
        }
    }
    return out;
}

SparseSpectrum apply_riesz_sparse(const SparseSpectrum& f, double s) {
    SparseSpectrum out(f.dimension(), f.box_side());
    for (const auto& [key, value] : f.entries()) {
        const double r = f.xi(key).norm();
        IndexX mode(f.dimension());
        for (int a = 0; a < f.dimension(); ++a) mode[a] = key[std::size_t(a)];
        out.add(mode, r == 0.0 ? Complex(0, 0) : value * std::pow(r, -s));
    }
    return out;
}

double tl2_norm_sparse(const SparseSpectrum& f, double alpha, const LittlewoodPaleyPair& pair) {
    const double w = std::pow(f.mode_spacing(), f.dimension());
    double acc = 0.0;
    for (const auto& [key, value] : f.entries()) {
        const double r = f.xi(key).norm();
        if (r == 0.0) continue;
        const int lo = int(std::floor(std::log2(r / pair.profile().r3)));
        const int hi = int(std::ceil(std::log2(r / pair.profile().r0)));
        double stack = 0.0;
        for (int nu = lo; nu <= hi; ++nu) {
            const double p = pair.phi_hat(std::ldexp(r, -nu));
            stack += std::pow(2.0, 2.0 * nu * alpha) * p * p;
        }
        acc += stack * std::norm(value);
    }
    return std::sqrt(acc * w);
}

GrowthReport counterexample_growth(const LittlewoodPaleyPair& pair,
                                   const std::vector<int>& band_counts, double bump_width) {
    if (!pair.counterexample_mode())
        throw std::invalid_argument("counterexample_growth: counterexample pair required");
    if (bump_width > pair.modulation_radius() * 2.0)
        throw std::invalid_argument(
            "counterexample_growth: bump width exceeds the flat-ball margin of band 1");

    GrowthReport rep;
    rep.band_counts = band_counts;
    const int dim = pair.grid().dimension;
    const double box = pair.grid().box_side;

    // oracle 1: every band contributes the same mass to the source norm
    {
        const int probe = *std::max_element(band_counts.begin(), band_counts.end());
        SparseSpectrum f = coherent_band_family(dim, box, probe, bump_width);
        std::vector<double> per_band(std::size_t(probe), 0.0);
        const double w = std::pow(f.mode_spacing(), dim);
        for (const auto& [key, value] : f.entries()) {
            const double r = f.xi(key).norm();
            const int band = int(std::llround(std::log2(r)));
            const int lo = int(std::floor(std::log2(r / pair.profile().r3)));
            const int hi = int(std::ceil(std::log2(r / pair.profile().r0)));
            double stack = 0.0;
            for (int nu = lo; nu <= hi; ++nu) {
                const double p = pair.phi_hat(std::ldexp(r, -nu));
                stack += std::pow(2.0, -2.0 * nu) * p * p;
            }
            per_band[std::size_t(band - 1)] += stack * std::norm(value) * w;
        }
        double lo = per_band[0], hi = per_band[0];
        for (double v : per_band) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        rep.oracle_band_spread = (hi - lo) / hi;
    }

    // oracle 2: the demodulated sum is exactly N copies of the band-1 profile
    {
        const int probe = *std::max_element(band_counts.begin(), band_counts.end());
        SparseSpectrum fN = coherent_band_family(dim, box, probe, bump_width);
        SparseSpectrum f1 = coherent_band_family(dim, box, 1, bump_width);
        SparseSpectrum tN = apply_modulated_symbol(fN, pair);
        SparseSpectrum t1 = apply_modulated_symbol(f1, pair);
        double worst = 0.0, scale = 0.0;
        for (const auto& [key, value] : t1.entries())
            scale = std::max(scale, std::abs(value));
        for (const auto& [key, value] : tN.entries()) {
            IndexX mode(dim);
            for (int a = 0; a < dim; ++a) mode[a] = key[std::size_t(a)];
            worst = std::max(worst,
                             std::abs(value - double(probe) * t1.at(mode)) / (probe * scale));
        }
        rep.oracle_coherence = worst;
    }

    for (int N : band_counts) {
        SparseSpectrum f = coherent_band_family(dim, box, N, bump_width);
        const double source = tl2_norm_sparse(f, -1.0, pair);
        rep.ratios.push_back(tl2_norm_sparse(apply_modulated_symbol(f, pair), 0.0, pair) / source);
        rep.riesz_ratios.push_back(tl2_norm_sparse(apply_riesz_sparse(f, 1.0), 0.0, pair) / source);
    }

    rep.strictly_increasing = true;
    for (std::size_t i = 1; i < rep.ratios.size(); ++i)
        if (rep.ratios[i] <= rep.ratios[i - 1]) rep.strictly_increasing = false;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
        const double x = std::log(double(band_counts[i])), y = std::log(rep.ratios[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = double(rep.ratios.size());
    rep.log_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.slope_in_bracket = rep.log_slope >= 0.4 && rep.log_slope <= 0.6;

    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (double v : rep.riesz_ratios) {
        rmax = std::max(rmax, v);
        rmin = std::min(rmin, v);
    }
    rep.riesz_bounded = rmax <= rmin * 1.25;
    return rep;
}

}  // namespace phikit
