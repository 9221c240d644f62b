#include <doctest.h>

#include <phikit/transform.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace phikit;

namespace {

// Random real field with spectrum restricted to the lattice's covered band.
SampledField band_limited_field(const GridSpec& g, const LittlewoodPaleyPair& pair,
                                const TruncatedLattice& lat, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const double lo = pair.profile().r3 * std::ldexp(1.0, lat.nu_min() - 1);
    const double hi = pair.profile().r0 * std::ldexp(1.0, lat.nu_max() + 1);
    CArray spec = CArray::Zero(g.total_samples());
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        const double r = g.mode_radius(i);
        if (r >= lo && r <= hi) spec[i] = Complex(gauss(rng), gauss(rng));
    }
    // Hermitian symmetrization for a real field
    CArray sym(g.total_samples());
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        IndexX m = g.unflatten(i);
        for (int a = 0; a < g.dimension; ++a) m[a] = -m[a];
        sym[i] = 0.5 * (spec[i] + std::conj(spec[g.flatten(m)]));
    }
    return SampledField::from_spectrum(g, std::move(sym));
}

}  // namespace

TEST_CASE("smooth step shape") {
    CHECK(smooth_step(-1.0) == 0.0);
    CHECK(smooth_step(0.0) == 0.0);
    CHECK(smooth_step(1.0) == 1.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5));
    CHECK(smooth_step(0.3) + smooth_step(0.7) == doctest::Approx(1.0));
}

TEST_CASE("pair admissibility and partition identity") {
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    PairReport rep = validate_pair(pair);
    CHECK(rep.admissible);
    CHECK(rep.lower_bound_c >= 0.999999);
    CHECK(rep.support_violation == 0.0);
    CHECK(rep.partition_max_deviation <= 1e-10);
    CHECK(rep.rho_min >= rep.lower_bound_c * rep.lower_bound_c - 1e-12);
    CHECK(rep.rho_max <= 2.0 + 1e-12);
    CHECK(rep.radial_symmetry_gap <= 1e-12);
    CHECK(pair.phi_at_origin() > 0.0);

    // at |xi| = 1 only the nu = 0 dilate contributes: rho = 1, psi_hat = 1
    double rho_direct = 0.0;
    for (int nu = -3; nu <= 3; ++nu) {
        const double v = pair.phi_hat(std::ldexp(1.0, nu));
        rho_direct += v * v;
    }
    CHECK(rho_direct == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pair.phi_hat(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pair.psi_hat(1.0) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(build_lp_pair(g, AnnulusProfile{0.45, 0.6, 5.0 / 3.0, 1.9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_lp_pair(g, AnnulusProfile{0.52, 0.62, 5.0 / 3.0, 1.9}),
                    std::invalid_argument);
}

TEST_CASE("phi has vanishing zero frequency coefficient and spectral support away from 0") {
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    CHECK(std::abs(pair.phi().spectrum()[0]) == 0.0);
    // every mode below r0 carries exactly zero
    for (std::int64_t i = 0; i < g.total_samples(); ++i)
        if (g.mode_radius(i) <= pair.profile().r0)
            CHECK(std::abs(pair.phi().spectrum()[i]) == 0.0);
}

TEST_CASE("counterexample pair: ball conditions certified on the mode lattice") {
    GridSpec g(2, 2.0 * M_PI * 16.0, 256);
    auto pair = build_counterexample_pair(g);
    CHECK(pair.counterexample_mode());
    CHECK(pair.phi_hat(1.0) == 1.0);
    CHECK(pair.phi_hat(2.0) == 0.0);
    CHECK(pair.phi_hat(0.5) == 0.0);

    double worst = 0.0;
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        PointX xi = g.mode_point(i);
        double d2 = (xi[0] - 1.0) * (xi[0] - 1.0);
        for (int a = 1; a < 2; ++a) d2 += xi[a] * xi[a];
        if (d2 > 0.05 * 0.05) continue;
        const double r = xi.norm();
        worst = std::max(worst, std::abs(pair.phi_hat(2.0 * r)) + std::abs(pair.phi_hat(0.5 * r)));
        CHECK(pair.phi_hat(r) == 1.0);
    }
    CHECK(worst == 0.0);

    // a coarse box cannot resolve the ball
    CHECK_THROWS_AS(build_counterexample_pair(GridSpec(2, 8.0, 64)), std::domain_error);
}

TEST_CASE("regularizer family") {
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    const int jmax = max_regularizer_level(pair);
    CHECK(jmax >= 3);
    for (int j = 0; j <= jmax; ++j) {
        SampledField eta = regularizer(pair, j);
        IndexX origin(2);
        origin << 0, 0;
        CHECK(std::abs(eta.value_at(origin) - 1.0) <= 1e-12);
        // spectral support inside |xi| < 2^{1-j}
        for (std::int64_t i = 0; i < g.total_samples(); ++i)
            if (g.mode_radius(i) >= std::ldexp(2.0, -j))
                CHECK(std::abs(eta.spectrum()[i]) == 0.0);
    }
    CHECK_THROWS_AS(regularizer(pair, jmax + 1), std::domain_error);

    // <psi_Q, eta^j> = 0 once the supports separate: j >= 5 - mu and nu >= mu - 3
    TruncatedLattice lat(g, -2, 2);
    std::mt19937_64 rng(3);
    for (int mu : {2, 3}) {
        for (int nu = mu - 3; nu <= 2; ++nu) {
            const int j = 5 - mu;
            if (j > jmax) continue;
            SampledField eta = regularizer(pair, j);
            IndexX k(2);
            k << std::int64_t(rng() % 16), std::int64_t(rng() % 16);
            SampledField psi_q = cube_field(pair, Family::Psi, DyadicCube{nu, k});
            CHECK(std::abs(inner_product(psi_q, eta)) == 0.0);
        }
    }
}

TEST_CASE("mollifier") {
    GridSpec g(2, 64.0, 256);
    Mollifier moll = build_mollifier(g);
    CHECK(moll.profile(0.0) == 1.0);
    CHECK(moll.profile(0.3) == 1.0);
    CHECK(moll.profile(0.96) == 0.0);
    CHECK(moll.profile(1.5) == 0.0);
    // integral of Phi equals 1 under the stored normalization: the zero
    // frequency coefficient is (2 pi)^{-n/2} * 1
    const double conv = std::pow(2.0 * M_PI, -1.0);
    CHECK(std::abs(moll.field.spectrum()[0] - conv) <= 1e-14);
    const double h = g.spacing();
    Complex integral = moll.field.space().sum() * h * h;
    CHECK(std::abs(integral - 1.0) <= 1e-10);
}

TEST_CASE("analysis examples") {
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    TruncatedLattice lat(g, -2, 2);

    CoefficientSequence zero = analyze(SampledField::zero(g), pair, lat);
    CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);

    // spectrum outside all covered annuli -> all coefficients 0
    CArray spec = CArray::Zero(g.total_samples());
    for (std::int64_t i = 0; i < g.total_samples(); ++i)
        if (g.mode_radius(i) > std::ldexp(pair.profile().r3, 2)) spec[i] = 1.0;
    SampledField outside = SampledField::from_spectrum(g, std::move(spec));
    CoefficientSequence c_out = analyze(outside, pair, lat);
    CHECK(c_out.values.cwiseAbs().maxCoeff() == 0.0);

    // |<f, phi_Q>| <= ||f||_2 ||phi||_2 with ||phi_Q||_2 = ||phi||_2
    SampledField f = band_limited_field(g, pair, lat, 77);
    CoefficientSequence cf = analyze(f, pair, lat);
    const double bound = lp_norm(f, 2.0) * lp_norm(pair.phi(), 2.0);
    CHECK(cf.values.cwiseAbs().maxCoeff() <= bound * (1.0 + 1e-10));
}

TEST_CASE("analyze matches direct cube pairings") {
    GridSpec g(2, 16.0, 64);
    auto pair = build_lp_pair(g);
    TruncatedLattice lat(g, 0, 1);
    SampledField f = band_limited_field(g, pair, lat, 5);
    CoefficientSequence c = analyze(f, pair, lat);
    std::mt19937_64 rng(8);
    for (int t = 0; t < 8; ++t) {
        const int nu = int(rng() % 2);
        IndexX k(2);
        k << std::int64_t(rng() % lat.cubes_per_axis(nu)), std::int64_t(rng() % lat.cubes_per_axis(nu));
        DyadicCube q{nu, k};
        Complex direct = inner_product(f, cube_field(pair, Family::Phi, q));
        CHECK(std::abs(c[q] - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("synthesis examples") {
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    TruncatedLattice lat(g, -2, 2);

    // single nonzero coefficient reproduces psi_Q
    IndexX k(2);
    k << 3, 9;
    DyadicCube q{1, k};
    CoefficientSequence s{lat, Eigen::VectorXcd::Zero(lat.cube_count())};
    s.values[lat.index_of(q)] = 1.0;
    SampledField single = synthesize(s, pair);
    SampledField direct = cube_field(pair, Family::Psi, q);
    CHECK(max_abs_difference(single, direct) <= 1e-12);

    // linearity
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd a(lat.cube_count()), b(lat.cube_count());
    for (std::int64_t i = 0; i < a.size(); ++i) {
        a[i] = Complex(gauss(rng), gauss(rng));
        b[i] = Complex(gauss(rng), gauss(rng));
    }
    CoefficientSequence sa{lat, a}, sb{lat, b}, sab{lat, 2.0 * a + Complex(0, 1) * b};
    SampledField lhs = synthesize(sab, pair);
    SampledField rhs = synthesize(sa, pair) * Complex(2.0, 0.0) +
                       synthesize(sb, pair) * Complex(0.0, 1.0);
    CHECK(max_abs_difference(lhs, rhs) <= 1e-10 * lp_norm(lhs, INFINITY));

    // order independence oracle: direct summation over cubes in two orders on
    // a small lattice, evaluated at a few samples
    GridSpec gs(2, 16.0, 32);
    auto pair_s = build_lp_pair(gs);
    TruncatedLattice lat_s(gs, 0, 1);
    Eigen::VectorXcd coef(lat_s.cube_count());
    for (std::int64_t i = 0; i < coef.size(); ++i) coef[i] = Complex(gauss(rng), gauss(rng));
    std::vector<std::int64_t> order(lat_s.cube_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = std::int64_t(i);
    std::shuffle(order.begin(), order.end(), rng);
    CArray sum1 = CArray::Zero(gs.total_samples()), sum2 = CArray::Zero(gs.total_samples());
    for (std::int64_t i = 0; i < lat_s.cube_count(); ++i) {
        sum1 += coef[i] * cube_field(pair_s, Family::Psi, lat_s.cube(i)).space();
        sum2 += coef[order[i]] * cube_field(pair_s, Family::Psi, lat_s.cube(order[i])).space();
    }
    CHECK((sum1 - sum2).abs().maxCoeff() <= 1e-12 * sum1.abs().maxCoeff());
    SampledField via_fft = synthesize(CoefficientSequence{lat_s, coef}, pair_s);
    CHECK((sum1 - via_fft.space()).abs().maxCoeff() <= 1e-10 * sum1.abs().maxCoeff());
}

TEST_CASE("reconstruction identity") {
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    TruncatedLattice lat(g, -2, 2);

    CHECK(reconstruction_residual(SampledField::zero(g), pair, lat) == 0.0);

    // f = psi_Q reconstructs
    IndexX k(2);
    k << 5, 2;
    SampledField psi_q = cube_field(pair, Family::Psi, DyadicCube{0, k});
    CHECK(reconstruction_residual(psi_q, pair, lat) <= 1e-8);

    // 50 seeded band-limited fields
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SampledField f = band_limited_field(g, pair, lat, 1000 + seed);
        CHECK(reconstruction_residual(f, pair, lat) <= 1e-8);
    }

    // spectrum straddling the coverage edge: residual equals the uncovered
    // spectral fraction (in L2: residual^2 = uncovered mass fraction)
    CArray spec = CArray::Zero(g.total_samples());
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss;
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        const double r = g.mode_radius(i);
        if (r > 0.05 && r < 8.0) spec[i] = Complex(gauss(rng), gauss(rng));
    }
    SampledField wide = SampledField::from_spectrum(g, std::move(spec));
    const double resid = reconstruction_residual(wide, pair, lat);
    // direct spectral-mass oracle: residual^2 = sum |1 - partition(m)|^2 mass
    double num = 0.0, den = 0.0;
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        const double a2 = std::norm(wide.spectrum()[i]);
        if (a2 == 0.0) continue;
        double part = 0.0;
        for (int nu = lat.nu_min(); nu <= lat.nu_max(); ++nu) {
            const double r = std::ldexp(g.mode_radius(i), -nu);
            part += pair.phi_hat(r) * pair.psi_hat(r);
        }
        num += (1.0 - part) * (1.0 - part) * a2;
        den += a2;
    }
    CHECK(std::abs(resid - std::sqrt(num / den)) <= 1e-8);
    // and the uncovered fraction bounds the residual from above
    const double uncovered = uncovered_spectral_fraction(wide, pair, lat);
    CHECK(resid <= std::sqrt(uncovered) + 1e-12);
}

TEST_CASE("pairing expansion") {
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    TruncatedLattice lat(g, -2, 2);

    IndexX k(2);
    k << 7, 7;
    SampledField psi_q = cube_field(pair, Family::Psi, DyadicCube{0, k});
    PairingExpansion pe = pairing_expansion(psi_q, psi_q, pair, lat);
    const double norm_sq = lp_norm(pair.psi(), 2.0) * lp_norm(pair.psi(), 2.0);
    CHECK(std::abs(pe.direct - norm_sq) <= 1e-8 * norm_sq);
    CHECK(pe.deviation <= 1e-8 * norm_sq);
    CHECK_FALSE(pe.coverage_warning);

    // g orthogonal to all covered annuli -> expansion 0
    CArray spec = CArray::Zero(g.total_samples());
    spec[g.flatten([&] { IndexX i(2); i << 1, 0; return i; }())] = 1.0;  // below coverage
    SampledField low = SampledField::from_spectrum(g, std::move(spec));
    SampledField f = band_limited_field(g, pair, lat, 33);
    PairingExpansion pe0 = pairing_expansion(f, low, pair, lat);
    CHECK(std::abs(pe0.expansion) == 0.0);
    CHECK(pe0.coverage_warning);

    // bilinearity under f -> 2f
    PairingExpansion one = pairing_expansion(f, psi_q, pair, lat);
    PairingExpansion two = pairing_expansion(f * Complex(2, 0), psi_q, pair, lat);
    CHECK(std::abs(two.expansion - 2.0 * one.expansion) <= 1e-10 * std::abs(one.expansion));
}

TEST_CASE("frame identity is stable under lattice refinement") {
    // measured analysis bound ||S_phi f||_{f_2^{0,2}} <= C ||f||_2 with C
    // stable between nested lattices (checked through the coefficient l2 mass
    // here; the full sequence norm lives in the spaces module)
    GridSpec g(2, 64.0, 256);
    auto pair = build_lp_pair(g);
    TruncatedLattice coarse(g, -2, 1), fine(g, -2, 2);
    double cmax = 0.0, fmax = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SampledField f = band_limited_field(g, pair, coarse, 500 + seed);
        const double n2 = lp_norm(f, 2.0);
        cmax = std::max(cmax, analyze(f, pair, coarse).values.norm() / n2);
        fmax = std::max(fmax, analyze(f, pair, fine).values.norm() / n2);
    }
    CHECK(std::abs(fmax - cmax) <= 0.05 * cmax);
}

TEST_CASE("coefficient serialization round trip") {
    GridSpec g(2, 16.0, 64);
    auto pair = build_lp_pair(g);
    TruncatedLattice lat(g, 0, 1);
    SampledField f = band_limited_field(g, pair, lat, 21);
    CoefficientSequence c = analyze(f, pair, lat);
    std::stringstream ss;
    write_coefficients(ss, c);
    Eigen::VectorXcd back = read_coefficients(ss, lat);
    CHECK((back - c.values).cwiseAbs().maxCoeff() == 0.0);
}
