#include <phikit/transform.hpp>

#include <phikit/fft.hpp>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace phikit {

namespace {

// Shared gather/scatter between coefficient storage and the sample lattice of
// cube corners at one scale.
template <typename Fn>
void for_each_corner(const TruncatedLattice& lattice, int nu, Fn&& fn) {
    const GridSpec& g = lattice.grid();
    const int n = g.dimension;
    const std::int64_t stride = lattice.samples_per_side(nu);
    const std::int64_t per = lattice.cubes_per_axis(nu);
    const std::int64_t base = lattice.scale_offset(nu);
    const std::int64_t count = lattice.cubes_at_scale(nu);
    IndexX idx(n);
    for (std::int64_t c = 0; c < count; ++c) {
        std::int64_t rem = c;
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = (rem % per) * stride;
            rem /= per;
        }
        fn(base + c, g.flatten(idx));
    }
}

CoefficientSequence analyze_impl(const SampledField& f, const TruncatedLattice& lattice,
                                 const std::function<double(double)>& profile_hat) {
    const GridSpec& g = f.grid();
    if (g != lattice.grid()) throw std::invalid_argument("analyze: grid mismatch");
    const std::int64_t total = g.total_samples();
    const int n = g.dimension;
    const double conv = std::pow(2.0 * M_PI, -0.5 * n);
    const double weight = std::pow(g.mode_spacing(), n);

    Eigen::VectorXcd out(lattice.cube_count());
    CArray work(total);
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
        for (std::int64_t i = 0; i < total; ++i) {
            const double p = profile_hat(std::ldexp(g.mode_radius(i), -nu));
            work[i] = p == 0.0 ? Complex(0, 0) : f.spectrum()[i] * (conv * p);
        }
        detail::dft(g, work, /*inverse=*/true);
        const double amp = std::pow(std::ldexp(1.0, -nu), 0.5 * n) * weight;  // |Q|^{1/2} w
        for_each_corner(lattice, nu,
                        [&](std::int64_t ci, std::int64_t si) { out[ci] = amp * work[si]; });
    }
    return CoefficientSequence{lattice, std::move(out)};
}

}  // namespace

CoefficientSequence analyze(const SampledField& f, const LittlewoodPaleyPair& pair,
                            const TruncatedLattice& lattice, Family fam) {
    return analyze_impl(f, lattice, [&](double r) { return pair.family_hat(fam, r); });
}

CoefficientSequence analyze_mollifier(const SampledField& f, const Mollifier& moll,
                                      const TruncatedLattice& lattice) {
    return analyze_impl(f, lattice, [&](double r) { return moll.profile(r); });
}

SampledField synthesize(const CoefficientSequence& s, const LittlewoodPaleyPair& pair,
                        Family fam) {
    const TruncatedLattice& lattice = s.lattice;
    const GridSpec& g = lattice.grid();
    const std::int64_t total = g.total_samples();
    const int n = g.dimension;
    const double conv = std::pow(2.0 * M_PI, -0.5 * n);

    CArray spec = CArray::Zero(total);
    CArray work(total);
    for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
        work.setZero();
        for_each_corner(lattice, nu,
                        [&](std::int64_t ci, std::int64_t si) { work[si] = s.values[ci]; });
        detail::dft(g, work, /*inverse=*/false);  // sum_k s_k exp(-i x_Q . xi_m)

        const double amp = std::pow(std::ldexp(1.0, -nu), 0.5 * n);  // |Q|^{1/2}
        for (std::int64_t i = 0; i < total; ++i) {
            const double p = pair.family_hat(fam, std::ldexp(g.mode_radius(i), -nu));
            if (p != 0.0) spec[i] += conv * p * amp * work[i];
        }
    }
    return SampledField::from_spectrum(g, std::move(spec));
}

double reconstruction_residual(const SampledField& f, const LittlewoodPaleyPair& pair,
                               const TruncatedLattice& lattice) {
    SampledField rec = synthesize(analyze(f, pair, lattice), pair);
    const double num = lp_norm(rec - f, 2.0);
    const double den = lp_norm(f, 2.0);
    return den == 0.0 ? num : num / den;
}

double uncovered_spectral_fraction(const SampledField& f, const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice) {
    const GridSpec& g = f.grid();
    double covered = 0.0, total = 0.0;
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        const double a2 = std::norm(f.spectrum()[i]);
        if (a2 == 0.0) continue;
        total += a2;
        double part = 0.0;
        for (int nu = lattice.nu_min(); nu <= lattice.nu_max(); ++nu) {
            const double r = std::ldexp(g.mode_radius(i), -nu);
            part += pair.phi_hat(r) * pair.psi_hat(r);
        }
        if (std::abs(part - 1.0) <= 1e-12) covered += a2;
    }
    return total == 0.0 ? 0.0 : (total - covered) / total;
}

PairingExpansion pairing_expansion(const SampledField& f, const SampledField& g,
                                   const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice) {
    CoefficientSequence cf = analyze(f, pair, lattice, Family::Phi);
    CoefficientSequence cg = analyze(g, pair, lattice, Family::Psi);
    // want sum_Q cf_Q * conj(cg_Q); Eigen's dot conjugates its first argument
    Complex expansion = cg.values.dot(cf.values);

    PairingExpansion out;
    out.expansion = expansion;
    out.direct = inner_product(f, g);
    out.deviation = std::abs(out.expansion - out.direct);
    out.coverage_warning = uncovered_spectral_fraction(g, pair, lattice) > 1e-10 ||
                           uncovered_spectral_fraction(f, pair, lattice) > 1e-10;
    return out;
}

void write_coefficients(std::ostream& os, const CoefficientSequence& s) {
    const TruncatedLattice& lat = s.lattice;
    char buf[256];
    for (std::int64_t i = 0; i < lat.cube_count(); ++i) {
        DyadicCube q = lat.cube(i);
        int off = std::snprintf(buf, sizeof buf, "%d", q.nu);
        for (int a = 0; a < q.k.size(); ++a)
            off += std::snprintf(buf + off, int(sizeof buf) - off, " %lld", (long long)q.k[a]);
        std::snprintf(buf + off, int(sizeof buf) - off, " %.17g %.17g", s.values[i].real(),
                      s.values[i].imag());
        os << buf << '\n';
    }
}

Eigen::VectorXcd read_coefficients(std::istream& is, const TruncatedLattice& lattice) {
    Eigen::VectorXcd vals = Eigen::VectorXcd::Zero(lattice.cube_count());
    std::string line;
    const int n = lattice.grid().dimension;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        DyadicCube q;
        q.k.resize(n);
        double re, im;
        ss >> q.nu;
        for (int a = 0; a < n; ++a) ss >> q.k[a];
        ss >> re >> im;
        if (!ss) throw std::runtime_error("read_coefficients: malformed record: " + line);
        vals[lattice.index_of(q)] = Complex(re, im);
    }
    return vals;
}

}  // namespace phikit
