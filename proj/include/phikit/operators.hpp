#pragma once

#include <phikit/transform.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace phikit {

/// Bilinear pairing [f, g] = integral of f * g (no conjugation): the pairing
/// the transpose identity <Tf, g> = <f, T^t g> is stated in. Evaluated in
/// frequency, exactly on the mode lattice.
Complex bilinear_pairing(const SampledField& f, const SampledField& g);

class OperatorBackend {
  public:
    virtual ~OperatorBackend() = default;
    virtual SampledField apply(const SampledField& f) const = 0;
    virtual std::shared_ptr<const OperatorBackend> transpose() const = 0;
    virtual std::string describe() const = 0;
    /// Multiplier value at a mode, when the backend is a pure multiplier
    /// (enables fast paths for matrices and integral checks).
    virtual bool multiplier_value(const PointX&, Complex&) const { return false; }
};

/// Immutable handle with value semantics over a shared backend.
class Operator {
  public:
    Operator() = default;
    explicit Operator(std::shared_ptr<const OperatorBackend> backend)
        : backend_(std::move(backend)) {}

    bool valid() const { return backend_ != nullptr; }
    SampledField apply(const SampledField& f) const { return backend_->apply(f); }
    Operator transpose() const { return Operator(backend_->transpose()); }
    std::string describe() const { return backend_->describe(); }
    bool multiplier_value(const PointX& xi, Complex& out) const {
        return backend_->multiplier_value(xi, out);
    }

  private:
    std::shared_ptr<const OperatorBackend> backend_;
};

Operator identity_operator();
Operator zero_operator();

/// Fourier multiplier backend from a formula on frequency vectors.
Operator multiplier_operator(std::function<Complex(const PointX&)> symbol, std::string name);

/// I^s: multiplier |xi|^{-s} with the zero mode mapped to 0 (all claims about
/// Riesz potentials are restricted to zero-mean fields on the torus).
Operator riesz_potential(double s);
Operator partial_derivative(int axis);
Operator riesz_transform(int axis);

/// Convolution with a sampled kernel: (k * f)(x) = sum_y k(x - y) f(y) h^n.
Operator convolution_operator(const SampledField& kernel);

/// Dense quadrature operator: Tf(x) = sum_{y != x} K(x, y) f(y) h^n. The
/// diagonal cell contributes diagonal_weight * f(x) (0 by default, matching
/// the omitted-singular-cell policy; callers may supply the exact cell
/// integral of the kernel instead).
struct QuadratureKernel {
    std::function<Complex(const PointX&, const PointX&)> eval;
    std::string name;
};
Operator quadrature_operator(const GridSpec& grid, QuadratureKernel kernel,
                             bool verify_size_bound = true, double diagonal_weight = 0.0);

/// The modulated-symbol operator
///   T_a f = (2 pi)^{-n/2} sum_nu 2^{-nu} exp(-i 2^nu e_1 . x) (phi_nu * f)
/// truncated to the scales the grid represents exactly (integer mode shifts).
/// Requires a pair in counterexample mode.
Operator modulated_symbol_operator(const LittlewoodPaleyPair& pair);

/// Linear combinations (for decompositions such as T - Pi_a - Pi_b^t).
Operator operator_sum(const std::vector<std::pair<Complex, Operator>>& terms, std::string name);

struct GradientRieszReport {
    double max_identity_error = 0.0;   // max over seeds/axes of |grad I^1 f - R f|
    double max_sum_error = 0.0;        // sum_j R_j^2 + identity on zero-mean fields
    double max_reality_error = 0.0;    // imag part of R_j f for real f
    bool passed = false;
};

/// Checks grad I^1 = R and the algebra sum_j R_j^2 = -identity on seeded
/// band-limited fields.
GradientRieszReport gradient_riesz_identity_check(const LittlewoodPaleyPair& pair,
                                                  const TruncatedLattice& lattice,
                                                  std::uint64_t seed = 4242);

struct MaximalInequalityReport {
    double kernel_size_constant = 0.0;  // fitted C_K over sampled pairs
    double slack = 0.0;                 // max (|Tf| / (C_K J|f|) - 1)+ over samples
    double fitted_maximal_constant = 0.0;  // C in J(|f|) <= C M(f)^{p/q} ||f||_p^{1-p/q}
    bool passed = false;
};

/// The size-only inequality chain |Tf| <= C_K J(|f|) <= C M(f)^{p/q} ||f||_p^{1-p/q}
/// on nonnegative seeded data, where T is quadrature against K, J is
/// quadrature against |x-y|^{1-n}, C_K is fitted from the kernel samples, and
/// (p, q) = (1, n/(n-1))'s conjugate pattern with 1/p - 1/q = 1/n.
MaximalInequalityReport maximal_inequality_check(const GridSpec& grid,
                                                 const QuadratureKernel& kernel,
                                                 std::uint64_t seed = 999);

}  // namespace phikit
