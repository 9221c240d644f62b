#include <phikit/operators.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace phikit {

Complex bilinear_pairing(const SampledField& f, const SampledField& g) {
    if (f.grid() != g.grid()) throw std::invalid_argument("bilinear_pairing: grid mismatch");
    const GridSpec& grid = f.grid();
    const double w = std::pow(grid.mode_spacing(), grid.dimension);
    Complex acc(0.0, 0.0);
    for (std::int64_t i = 0; i < grid.total_samples(); ++i) {
        IndexX m = grid.unflatten(i);
        for (int a = 0; a < grid.dimension; ++a) m[a] = -m[a];
        acc += f.spectrum()[i] * g.spectrum()[grid.flatten(m)];
    }
    return acc * w;
}

namespace {

class MultiplierBackend final : public OperatorBackend {
  public:
    MultiplierBackend(std::function<Complex(const PointX&)> symbol, std::string name,
                      bool reflected = false)
        : symbol_(std::move(symbol)), name_(std::move(name)), reflected_(reflected) {}

    SampledField apply(const SampledField& f) const override {
        const GridSpec& g = f.grid();
        CArray spec(g.total_samples());
        for (std::int64_t i = 0; i < g.total_samples(); ++i) {
            PointX xi = g.mode_point(i);
            if (reflected_) xi = -xi;
            spec[i] = symbol_(xi) * f.spectrum()[i];
        }
        return SampledField::from_spectrum(g, std::move(spec));
    }

    std::shared_ptr<const OperatorBackend> transpose() const override {
        // transpose under the bilinear pairing reflects the symbol
        return std::make_shared<MultiplierBackend>(symbol_, name_ + "^t", !reflected_);
    }

    std::string describe() const override { return "multiplier:" + name_; }

    bool multiplier_value(const PointX& xi, Complex& out) const override {
        out = reflected_ ? symbol_(PointX(-xi)) : symbol_(xi);
        return true;
    }

  private:
    std::function<Complex(const PointX&)> symbol_;
    std::string name_;
    bool reflected_;
};

class ConvolutionBackend final : public OperatorBackend {
  public:
    ConvolutionBackend(SampledField kernel, bool reflected = false)
        : kernel_(std::move(kernel)), reflected_(reflected) {}

    SampledField apply(const SampledField& f) const override {
        const GridSpec& g = f.grid();
        if (g != kernel_.grid()) throw std::invalid_argument("convolution: grid mismatch");
        const double c = std::pow(2.0 * M_PI, 0.5 * g.dimension);
        CArray spec(g.total_samples());
        for (std::int64_t i = 0; i < g.total_samples(); ++i) {
            Complex kv;
            if (reflected_) {
                IndexX m = g.unflatten(i);
                for (int a = 0; a < g.dimension; ++a) m[a] = -m[a];
                kv = kernel_.spectrum()[g.flatten(m)];
            } else {
                kv = kernel_.spectrum()[i];
            }
            spec[i] = c * kv * f.spectrum()[i];
        }
        return SampledField::from_spectrum(g, std::move(spec));
    }

    std::shared_ptr<const OperatorBackend> transpose() const override {
        return std::make_shared<ConvolutionBackend>(kernel_, !reflected_);
    }

    std::string describe() const override {
        return reflected_ ? "convolution(reflected)" : "convolution";
    }

    bool multiplier_value(const PointX&, Complex&) const override { return false; }

  private:
    SampledField kernel_;
    bool reflected_;
};

class QuadratureBackend final : public OperatorBackend {
  public:
    QuadratureBackend(GridSpec grid, QuadratureKernel kernel, double diagonal_weight, bool swapped)
        : grid_(grid), kernel_(std::move(kernel)), diagonal_weight_(diagonal_weight),
          swapped_(swapped) {}

    SampledField apply(const SampledField& f) const override {
        if (f.grid() != grid_) throw std::invalid_argument("quadrature: grid mismatch");
        const std::int64_t total = grid_.total_samples();
        if (total > (std::int64_t(1) << 15))
            throw std::domain_error("quadrature: grid too large for a dense sweep");
        const double w = std::pow(grid_.spacing(), grid_.dimension);
        CArray out(total);
        std::vector<PointX> pts(total);
        for (std::int64_t i = 0; i < total; ++i) pts[i] = grid_.sample_point(i);
        for (std::int64_t i = 0; i < total; ++i) {
            Complex acc(0.0, 0.0);
            for (std::int64_t j = 0; j < total; ++j) {
                if (j == i) continue;
                const Complex kv = swapped_ ? kernel_.eval(pts[j], pts[i])
                                            : kernel_.eval(pts[i], pts[j]);
                acc += kv * f.space()[j];
            }
            out[i] = acc * w + diagonal_weight_ * f.space()[i];
        }
        return SampledField::from_space(grid_, std::move(out));
    }

    std::shared_ptr<const OperatorBackend> transpose() const override {
        return std::make_shared<QuadratureBackend>(grid_, kernel_, diagonal_weight_, !swapped_);
    }

    std::string describe() const override {
        return "quadrature:" + kernel_.name + (swapped_ ? "^t" : "");
    }

  private:
    GridSpec grid_;
    QuadratureKernel kernel_;
    double diagonal_weight_;
    bool swapped_;
};

// T_a f = (2 pi)^{-n/2} sum_nu 2^{-nu} e^{-i 2^nu e1 x} (phi_nu * f); the
// transpose applies the modulation before the convolution.
class ModulatedSymbolBackend final : public OperatorBackend {
  public:
    ModulatedSymbolBackend(std::shared_ptr<const LittlewoodPaleyPair> pair, bool transposed)
        : pair_(std::move(pair)), transposed_(transposed) {}

    SampledField apply(const SampledField& f) const override {
        const GridSpec& g = f.grid();
        if (g != pair_->grid()) throw std::invalid_argument("modulated symbol: grid mismatch");
        const std::int64_t total = g.total_samples();
        const double conv = std::pow(2.0 * M_PI, -0.5 * g.dimension);
        CArray acc = CArray::Zero(total);
        CArray term(total);
        for (int nu = lowest_scale(g); nu <= highest_scale(g); ++nu) {
            const double shift_modes = std::ldexp(1.0, nu) / g.mode_spacing();
            if (std::abs(shift_modes - std::round(shift_modes)) > 1e-9) continue;
            const std::int64_t sm = std::int64_t(std::llround(shift_modes));
            const double amp = conv * std::ldexp(1.0, -nu);
            // mask with phi_hat(2^{-nu} xi), then shift modes by -2^nu e1
            // (transpose order: shift by -2^nu e1 first, then mask)
            bool any = false;
            term.setZero();
            for (std::int64_t i = 0; i < total; ++i) {
                IndexX m = g.mode_tuple(i);
                if (!transposed_) {
                    // out[m] = amp * phi_hat(|xi_{m + sm e1}|) f[m + sm e1]
                    IndexX src = m;
                    src[0] += sm;
                    if (src[0] < -g.samples_per_axis / 2 || src[0] >= g.samples_per_axis / 2)
                        continue;
                    const double r = std::ldexp(radius(g, src), -nu);
                    const double p = pair_->phi_hat(r);
                    if (p == 0.0) continue;
                    term[i] = amp * p * f.spectrum()[g.flatten(src)];
                    any = true;
                } else {
                    // T^t = conv after modulation: out[m] = amp phi_hat(|xi_m|) f[m + sm e1]
                    IndexX src = m;
                    src[0] += sm;
                    if (src[0] < -g.samples_per_axis / 2 || src[0] >= g.samples_per_axis / 2)
                        continue;
                    const double r = std::ldexp(radius(g, m), -nu);
                    const double p = pair_->phi_hat(r);
                    if (p == 0.0) continue;
                    term[i] = amp * p * f.spectrum()[g.flatten(src)];
                    any = true;
                }
            }
            if (any) acc += term;
        }
        return SampledField::from_spectrum(g, std::move(acc));
    }

    std::shared_ptr<const OperatorBackend> transpose() const override {
        return std::make_shared<ModulatedSymbolBackend>(pair_, !transposed_);
    }

    std::string describe() const override {
        return transposed_ ? "modulated-symbol^t" : "modulated-symbol";
    }

    static int lowest_scale(const GridSpec& g) {
        // smallest nu whose annulus still contains a nonzero mode radius and
        // whose modulation frequency is on the mode lattice
        int nu = 0;
        while (std::ldexp(1.85, nu - 1) > g.mode_spacing() && nu > -40) --nu;
        return nu + 1;
    }
    static int highest_scale(const GridSpec& g) {
        int nu = 0;
        while (std::ldexp(0.55, nu + 1) < g.nyquist() && nu < 40) ++nu;
        return nu - 1;
    }

  private:
    static double radius(const GridSpec& g, const IndexX& m) {
        double s = 0.0;
        for (int a = 0; a < g.dimension; ++a) s += double(m[a]) * double(m[a]);
        return std::sqrt(s) * g.mode_spacing();
    }

    std::shared_ptr<const LittlewoodPaleyPair> pair_;
    bool transposed_;
};

class SumBackend final : public OperatorBackend {
  public:
    SumBackend(std::vector<std::pair<Complex, Operator>> terms, std::string name)
        : terms_(std::move(terms)), name_(std::move(name)) {}

    SampledField apply(const SampledField& f) const override {
        SampledField acc = SampledField::zero(f.grid());
        for (const auto& [c, op] : terms_) acc = acc + op.apply(f) * c;
        return acc;
    }

    std::shared_ptr<const OperatorBackend> transpose() const override {
        std::vector<std::pair<Complex, Operator>> t;
        t.reserve(terms_.size());
        for (const auto& [c, op] : terms_) t.emplace_back(c, op.transpose());
        return std::make_shared<SumBackend>(std::move(t), name_ + "^t");
    }

    std::string describe() const override { return "sum:" + name_; }

  private:
    std::vector<std::pair<Complex, Operator>> terms_;
    std::string name_;
};

}  // namespace

Operator identity_operator() {
    return multiplier_operator([](const PointX&) { return Complex(1.0, 0.0); }, "identity");
}

Operator zero_operator() {
    return multiplier_operator([](const PointX&) { return Complex(0.0, 0.0); }, "zero");
}

Operator multiplier_operator(std::function<Complex(const PointX&)> symbol, std::string name) {
    return Operator(std::make_shared<MultiplierBackend>(std::move(symbol), std::move(name)));
}

Operator riesz_potential(double s) {
    return multiplier_operator(
        [s](const PointX& xi) {
            const double r = xi.norm();
            return r == 0.0 ? Complex(0.0, 0.0) : Complex(std::pow(r, -s), 0.0);
        },
        "riesz_potential(" + std::to_string(s) + ")");
}

Operator partial_derivative(int axis) {
    return multiplier_operator(
        [axis](const PointX& xi) { return Complex(0.0, xi[axis]); },
        "partial_derivative(" + std::to_string(axis) + ")");
}

Operator riesz_transform(int axis) {
    return multiplier_operator(
        [axis](const PointX& xi) {
            const double r = xi.norm();
            return r == 0.0 ? Complex(0.0, 0.0) : Complex(0.0, xi[axis] / r);
        },
        "riesz_transform(" + std::to_string(axis) + ")");
}

Operator convolution_operator(const SampledField& kernel) {
    return Operator(std::make_shared<ConvolutionBackend>(kernel));
}

Operator quadrature_operator(const GridSpec& grid, QuadratureKernel kernel,
                             bool verify_size_bound, double diagonal_weight) {
    if (verify_size_bound) {
        // spot-check |K(x,y)| <= C |x-y|^{1-n} with a generous fitted C and
        // reject non-finite values off the diagonal
        std::mt19937_64 rng(17);
        const std::int64_t total = grid.total_samples();
        for (int t = 0; t < 256; ++t) {
            const std::int64_t i = std::int64_t(rng() % std::uint64_t(total));
            const std::int64_t j = std::int64_t(rng() % std::uint64_t(total));
            PointX x = grid.sample_point(i), y = grid.sample_point(j);
            if (grid.torus_distance(x, y) < 0.5 * grid.spacing()) continue;
            const Complex v = kernel.eval(x, y);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("quadrature_operator: kernel non-finite off diagonal");
        }
    }
    return Operator(
        std::make_shared<QuadratureBackend>(grid, std::move(kernel), diagonal_weight, false));
}

Operator modulated_symbol_operator(const LittlewoodPaleyPair& pair) {
    if (!pair.counterexample_mode())
        throw std::invalid_argument(
            "modulated_symbol_operator: pair must be built in counterexample mode");
    return Operator(std::make_shared<ModulatedSymbolBackend>(
        std::make_shared<LittlewoodPaleyPair>(pair), false));
}

Operator operator_sum(const std::vector<std::pair<Complex, Operator>>& terms, std::string name) {
    return Operator(std::make_shared<SumBackend>(terms, std::move(name)));
}

GradientRieszReport gradient_riesz_identity_check(const LittlewoodPaleyPair& pair,
                                                  const TruncatedLattice& lattice,
                                                  std::uint64_t seed) {
    const GridSpec& g = pair.grid();
    GradientRieszReport rep;
    Operator i1 = riesz_potential(1.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const double lo = pair.profile().r3 * std::ldexp(1.0, lattice.nu_min() - 1);
    const double hi = pair.profile().r0 * std::ldexp(1.0, lattice.nu_max() + 1);
    for (int trial = 0; trial < 5; ++trial) {
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
        SampledField f = SampledField::from_spectrum(g, std::move(sym));
        const double scale = lp_norm(f, 2.0);

        SampledField i1f = i1.apply(f);
        SampledField rsum = SampledField::zero(g);
        for (int axis = 0; axis < g.dimension; ++axis) {
            SampledField lhs = partial_derivative(axis).apply(i1f);
            SampledField rj = riesz_transform(axis).apply(f);
            rep.max_identity_error =
                std::max(rep.max_identity_error, max_abs_difference(lhs, rj) / scale);
            rep.max_reality_error =
                std::max(rep.max_reality_error, rj.space().imag().abs().maxCoeff() / scale);
            rsum = rsum + riesz_transform(axis).apply(rj);
        }
        rep.max_sum_error = std::max(rep.max_sum_error, max_abs_difference(rsum, f * Complex(-1.0, 0.0)) / scale);
    }
    rep.passed = rep.max_identity_error <= 1e-12 && rep.max_sum_error <= 1e-12 &&
                 rep.max_reality_error <= 1e-12;
    return rep;
}

MaximalInequalityReport maximal_inequality_check(const GridSpec& grid,
                                                 const QuadratureKernel& kernel,
                                                 std::uint64_t seed) {
    MaximalInequalityReport rep;
    const int n = grid.dimension;
    const std::int64_t total = grid.total_samples();

    // fitted C_K = sup |K| |x - y|^{n-1} over sampled off-diagonal pairs
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 4096; ++t) {
        const std::int64_t i = std::int64_t(rng() % std::uint64_t(total));
        const std::int64_t j = std::int64_t(rng() % std::uint64_t(total));
        if (i == j) continue;
        PointX x = grid.sample_point(i), y = grid.sample_point(j);
        const double d = grid.torus_distance(x, y);
        if (d == 0.0) continue;
        rep.kernel_size_constant = std::max(
            rep.kernel_size_constant, std::abs(kernel.eval(x, y)) * std::pow(d, n - 1));
    }

    Operator T = quadrature_operator(grid, kernel, false);
    QuadratureKernel size_kernel{
        [&grid, n](const PointX& x, const PointX& y) {
            return Complex(std::pow(grid.torus_distance(x, y), 1 - n), 0.0);
        },
        "size"};
    Operator J = quadrature_operator(grid, size_kernel, false);

    std::normal_distribution<double> gauss;
    const double p = 1.0, q = double(n) / double(n - 1);
    for (int trial = 0; trial < 3; ++trial) {
        CArray v(total);
        for (std::int64_t i = 0; i < total; ++i) v[i] = std::abs(gauss(rng));
        SampledField f = SampledField::from_space(grid, std::move(v));
        SampledField tf = T.apply(f);
        SampledField jf = J.apply(f);
        SampledField mf = hl_maximal(f);
        const double fp = lp_norm(f, p);
        for (std::int64_t i = 0; i < total; ++i) {
            const double lhs = std::abs(tf.space()[i]);
            const double mid = rep.kernel_size_constant * jf.space()[i].real();
            if (mid > 0.0)
                rep.slack = std::max(rep.slack, lhs / mid - 1.0);
            const double rhs = std::pow(mf.space()[i].real(), p / q) * std::pow(fp, 1.0 - p / q);
            if (rhs > 0.0)
                rep.fitted_maximal_constant =
                    std::max(rep.fitted_maximal_constant, jf.space()[i].real() / rhs);
        }
    }
    rep.passed = rep.slack <= 0.10 && std::isfinite(rep.fitted_maximal_constant);
    return rep;
}

}  // namespace phikit
