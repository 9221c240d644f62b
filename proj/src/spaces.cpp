#include <phikit/spaces.hpp>

#include <phikit/fft.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace phikit {

void SpaceIndex::validate() const {
    if (!(p >= 1.0) || !(q >= 1.0))
        throw std::invalid_argument("SpaceIndex: p and q must be >= 1");
    if (!std::isfinite(alpha)) throw std::invalid_argument("SpaceIndex: alpha must be finite");
}

namespace {

// per-sample stack of cube weights |Q|^{-alpha/n - 1/2} |s_Q| for the cube of
// scale nu containing each sample
RArray scale_level_field(const CoefficientSequence& s, int nu, double alpha) {
    const TruncatedLattice& lat = s.lattice;
    const GridSpec& g = lat.grid();
    const int n = g.dimension;
    const double vol = std::pow(std::ldexp(1.0, -nu), n);
    const double w = std::pow(vol, -alpha / n - 0.5);
    RArray out(g.total_samples());
    const std::int64_t per_side = lat.samples_per_side(nu);
    const std::int64_t cubes_per_axis = lat.cubes_per_axis(nu);
    const std::int64_t base = lat.scale_offset(nu);
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        IndexX idx = g.unflatten(i);
        std::int64_t cube_flat = 0;
        for (int a = 0; a < n; ++a) cube_flat = cube_flat * cubes_per_axis + idx[a] / per_side;
        out[i] = w * std::abs(s.values[base + cube_flat]);
    }
    return out;
}

SequenceNormDetail sequence_norm_p_infinite(const CoefficientSequence& s, const SpaceIndex& idx) {
    const TruncatedLattice& lat = s.lattice;
    const GridSpec& g = lat.grid();
    const int n = g.dimension;
    SequenceNormDetail out;
    out.truncated_at_wall = true;

    if (idx.q_infinite()) {
        // sup_Q |Q|^{-alpha/n - 1/2} |s_Q|
        out.truncated_at_wall = false;
        for (std::int64_t i = 0; i < lat.cube_count(); ++i) {
            DyadicCube q = lat.cube(i);
            const double w = std::pow(q.volume(n), -idx.alpha / n - 0.5);
            const double v = w * std::abs(s.values[i]);
            if (v > out.value) {
                out.value = v;
                out.witness = q;
            }
        }
        return out;
    }

    // sup_P ( |P|^{-1} sum_{Q subset P} (|Q|^{-alpha/n-1/2+1/q} |s_Q|)^q )^{1/q}
    // accumulate per-P partial sums scale by scale
    for (int mu = lat.nu_min(); mu <= lat.nu_max(); ++mu) {
        const std::int64_t count_p = lat.cubes_at_scale(mu);
        const std::int64_t per_p = lat.cubes_per_axis(mu);
        std::vector<double> sums(count_p, 0.0);
        for (int nu = mu; nu <= lat.nu_max(); ++nu) {
            const double vol = std::pow(std::ldexp(1.0, -nu), n);
            const double w = std::pow(vol, -idx.alpha / n - 0.5 + 1.0 / idx.q);
            const std::int64_t per_q = lat.cubes_per_axis(nu);
            const std::int64_t ratio = per_q / per_p;
            const std::int64_t base = lat.scale_offset(nu);
            for (std::int64_t c = 0; c < lat.cubes_at_scale(nu); ++c) {
                // parent index at scale mu
                std::int64_t rem = c, parent = 0;
                for (int a = 0; a < n; ++a) {
                    // recover axis digits in C order
                    std::int64_t digit = rem;
                    for (int b = n - 1; b > a; --b) digit /= per_q;
                    digit %= per_q;
                    parent = parent * per_p + digit / ratio;
                }
                const double term = w * std::abs(s.values[base + c]);
                sums[parent] += std::pow(term, idx.q);
            }
        }
        const double inv_vol = std::pow(std::ldexp(1.0, mu), n);
        for (std::int64_t pi = 0; pi < count_p; ++pi) {
            const double v = std::pow(inv_vol * sums[pi], 1.0 / idx.q);
            if (v > out.value) {
                out.value = v;
                out.witness = lat.cube(lat.scale_offset(mu) + pi);
            }
        }
    }
    return out;
}

}  // namespace

SequenceNormDetail sequence_norm_detail(const CoefficientSequence& s, const SpaceIndex& idx) {
    idx.validate();
    const TruncatedLattice& lat = s.lattice;
    const GridSpec& g = lat.grid();
    const int n = g.dimension;

    if (idx.p_infinite()) return sequence_norm_p_infinite(s, idx);

    SequenceNormDetail out;
    out.truncated_at_wall = false;
    // stack over scales on the sample grid
    RArray acc = RArray::Zero(g.total_samples());
    for (int nu = lat.nu_min(); nu <= lat.nu_max(); ++nu) {
        RArray lvl = scale_level_field(s, nu, idx.alpha);
        if (idx.q_infinite())
            acc = acc.max(lvl);
        else
            acc += lvl.pow(idx.q);
    }
    if (!idx.q_infinite()) acc = acc.pow(1.0 / idx.q);
    const double w = std::pow(g.spacing(), n);
    out.value = std::pow((acc.pow(idx.p)).sum() * w, 1.0 / idx.p);
    return out;
}

double sequence_norm(const CoefficientSequence& s, const SpaceIndex& idx) {
    return sequence_norm_detail(s, idx).value;
}

namespace {

// 2^{nu alpha} |phi_nu * f| on the grid; spectrum of phi_nu * f is
// phi_prof(2^{-nu} xi) f_hat(xi) under the stored profile normalization.
RArray lp_block(const SampledField& f, const LittlewoodPaleyPair& pair, int nu, double alpha) {
    const GridSpec& g = f.grid();
    CArray work(g.total_samples());
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        const double p = pair.phi_hat(std::ldexp(g.mode_radius(i), -nu));
        work[i] = p == 0.0 ? Complex(0, 0) : p * f.spectrum()[i];
    }
    detail::dft(g, work, true);
    const double scale =
        std::pow(2.0, double(nu) * alpha) * std::pow(2.0 * M_PI, -0.5 * g.dimension) *
        std::pow(g.mode_spacing(), g.dimension);
    return work.abs() * scale;
}

}  // namespace

double tl_norm(const SampledField& f, const SpaceIndex& idx, const LittlewoodPaleyPair& pair,
               const ScaleWindow& window) {
    idx.validate();
    const GridSpec& g = f.grid();
    const int n = g.dimension;

    if (!idx.p_infinite()) {
        RArray acc = RArray::Zero(g.total_samples());
        for (int nu = window.nu_min; nu <= window.nu_max; ++nu) {
            RArray lvl = lp_block(f, pair, nu, idx.alpha);
            if (idx.q_infinite())
                acc = acc.max(lvl);
            else
                acc += lvl.pow(idx.q);
        }
        if (!idx.q_infinite()) acc = acc.pow(1.0 / idx.q);
        const double w = std::pow(g.spacing(), n);
        return std::pow((acc.pow(idx.p)).sum() * w, 1.0 / idx.p);
    }

    if (idx.q_infinite()) {
        // sup_nu 2^{nu alpha} || phi_nu * f ||_inf
        double best = 0.0;
        for (int nu = window.nu_min; nu <= window.nu_max; ++nu)
            best = std::max(best, lp_block(f, pair, nu, idx.alpha).maxCoeff());
        return best;
    }

    throw std::invalid_argument("tl_norm: the p = infinity, q < infinity branch needs a lattice");
}

double tl_norm(const SampledField& f, const SpaceIndex& idx, const LittlewoodPaleyPair& pair,
               const TruncatedLattice& lattice) {
    idx.validate();
    const GridSpec& g = f.grid();
    if (g != lattice.grid()) throw std::invalid_argument("tl_norm: grid mismatch");
    const int n = g.dimension;

    if (!idx.p_infinite() || idx.q_infinite())
        return tl_norm(f, idx, pair, ScaleWindow{lattice.nu_min(), lattice.nu_max()});

    // p = inf, q finite: sup_P ( |P|^{-1} int_P sum_{nu >= -log2 l(P)} (...)^q )^{1/q}
    // suffix sums over scales of the q-th powers, then cube averages per scale
    const int smin = lattice.nu_min(), smax = lattice.nu_max();
    std::vector<RArray> powers(smax - smin + 1);
    for (int nu = smin; nu <= smax; ++nu)
        powers[nu - smin] = lp_block(f, pair, nu, idx.alpha).pow(idx.q);
    // suffix[t] = sum_{nu >= t}
    for (int t = smax - smin - 1; t >= 0; --t) powers[t] += powers[t + 1];

    const double w = std::pow(g.spacing(), n);
    double best = 0.0;
    for (int mu = smin; mu <= smax; ++mu) {
        const RArray& suffix = powers[mu - smin];  // truncation nu >= mu (and >= nu_min)
        const std::int64_t per_side = lattice.samples_per_side(mu);
        const std::int64_t cubes_per_axis = lattice.cubes_per_axis(mu);
        const double inv_vol = std::pow(std::ldexp(1.0, mu), n);
        std::vector<double> sums(lattice.cubes_at_scale(mu), 0.0);
        for (std::int64_t i = 0; i < g.total_samples(); ++i) {
            IndexX idxs = g.unflatten(i);
            std::int64_t cube_flat = 0;
            for (int a = 0; a < n; ++a) cube_flat = cube_flat * cubes_per_axis + idxs[a] / per_side;
            sums[cube_flat] += suffix[i];
        }
        for (double sval : sums)
            best = std::max(best, std::pow(inv_vol * sval * w, 1.0 / idx.q));
    }
    return best;
}

SampledField random_band_limited(const LittlewoodPaleyPair& pair, const GridSpec& g,
                                 const ScaleWindow& window, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const double lo = pair.profile().r3 * std::ldexp(1.0, window.nu_min - 1);
    const double hi = pair.profile().r0 * std::ldexp(1.0, window.nu_max + 1);
    CArray spec = CArray::Zero(g.total_samples());
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        const double r = g.mode_radius(i);
        if (r >= lo && r <= hi) spec[i] = Complex(gauss(rng), gauss(rng));
    }
    CArray sym(g.total_samples());
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        IndexX m = g.unflatten(i);
        for (int a = 0; a < g.dimension; ++a) m[a] = -m[a];
        sym[i] = 0.5 * (spec[i] + std::conj(spec[g.flatten(m)]));
    }
    return SampledField::from_spectrum(g, std::move(sym));
}

SampledField random_band_limited(const LittlewoodPaleyPair& pair, const TruncatedLattice& lattice,
                                 std::uint64_t seed) {
    return random_band_limited(pair, lattice.grid(),
                               ScaleWindow{lattice.nu_min(), lattice.nu_max()}, seed);
}

RieszShiftReport riesz_shift_check(const SampledField& f, double s, const SpaceIndex& idx,
                                   const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice) {
    const GridSpec& g = f.grid();
    if (std::abs(f.spectrum()[0]) != 0.0)
        throw std::domain_error("riesz_shift_check: spectrum touches the zero mode");
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        if (std::norm(f.spectrum()[i]) == 0.0) continue;
        const double r = g.mode_radius(i);
        if (r == 0.0) throw std::domain_error("riesz_shift_check: spectrum touches the zero mode");
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    RieszShiftReport rep;
    rep.shift = s;
    SpaceIndex shifted = idx;
    shifted.alpha += s;
    const double denom = tl_norm(f, idx, pair, lattice);
    if (denom == 0.0) throw std::domain_error("riesz_shift_check: zero source norm");
    rep.ratio = tl_norm(riesz_potential(s).apply(f), shifted, pair, lattice) / denom;
    // bracket from the multiplier extremes 2^{nu alpha-weighted}: the shifted
    // weight 2^{nu s} meets |xi|^{-s} within one dyadic octave of slack
    rep.lower = std::pow(2.0, -(std::abs(s) + 1.0));
    rep.upper = std::pow(2.0, std::abs(s) + 1.0);
    rep.within_bracket = rep.ratio >= rep.lower && rep.ratio <= rep.upper;
    return rep;
}

namespace {

template <typename NormCtx>
RatioStatistics boundedness_ratio_impl(const Operator& T, const SpaceIndex& source,
                                       const SpaceIndex& target, const LittlewoodPaleyPair& pair,
                                       const GridSpec& grid, const NormCtx& ctx,
                                       const ScaleWindow& band, int sample_count,
                                       std::uint64_t seed) {
    RatioStatistics st;
    st.operator_name = T.describe();
    st.source = source;
    st.target = target;
    st.seed = seed;
    st.sample_count = sample_count;
    for (int t = 0; t < sample_count; ++t) {
        SampledField f = random_band_limited(pair, grid, band, seed + std::uint64_t(t));
        const double denom = tl_norm(f, source, pair, ctx);
        if (denom == 0.0) continue;
        const double num = tl_norm(T.apply(f), target, pair, ctx);
        st.ratios.push_back(num / denom);
    }
    if (!st.ratios.empty()) {
        std::vector<double> sorted = st.ratios;
        std::sort(sorted.begin(), sorted.end());
        st.max_ratio = sorted.back();
        st.median_ratio = sorted[sorted.size() / 2];
        st.q90_ratio = sorted[std::size_t(0.9 * double(sorted.size() - 1))];
    }
    return st;
}

}  // namespace

RatioStatistics boundedness_ratio(const Operator& T, const SpaceIndex& source,
                                  const SpaceIndex& target, const LittlewoodPaleyPair& pair,
                                  const TruncatedLattice& lattice, int sample_count,
                                  std::uint64_t seed) {
    return boundedness_ratio_impl(T, source, target, pair, lattice.grid(), lattice,
                                  ScaleWindow{lattice.nu_min(), lattice.nu_max()}, sample_count,
                                  seed);
}

RatioStatistics boundedness_ratio(const Operator& T, const SpaceIndex& source,
                                  const SpaceIndex& target, const LittlewoodPaleyPair& pair,
                                  const ScaleWindow& window, int sample_count,
                                  std::uint64_t seed) {
    return boundedness_ratio_impl(T, source, target, pair, pair.grid(), window, window,
                                  sample_count, seed);
}

}  // namespace phikit
