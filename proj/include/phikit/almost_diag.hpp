#pragma once

#include <phikit/spaces.hpp>

#include <iosfwd>
#include <optional>

namespace phikit {

/// W_{P,Q}(beta, gamma) = 2^{-|nu-mu|(n+gamma)/2} (1 + d / (l(P) v l(Q)))^{-(n+beta)}
/// from raw cube geometry (sides and torus distance).
double big_w(int dimension, double side_p, double side_q, double distance, double beta,
             double gamma);
double big_w(const GridSpec& grid, const DyadicCube& p, const DyadicCube& q, double beta,
             double gamma);

/// omega_{P,Q}(eps) = (l(P) ^ l(Q)) W_{P,Q}(eps, eps), the almost-diagonal
/// decay weight of the potential-operator calculus.
double omega(int dimension, double side_p, double side_q, double distance, double eps);
double omega(const GridSpec& grid, const DyadicCube& p, const DyadicCube& q, double eps);

/// Dense matrix of frame pairings A_{Q,P} = <T(psi_P), phi_Q>.
struct OperatorMatrix {
    TruncatedLattice lattice;
    Eigen::MatrixXcd entries;  // row Q, column P
    std::string provenance;
    std::uint64_t pair_hash = 0;

    Complex at(const DyadicCube& q, const DyadicCube& p) const {
        return entries(lattice.index_of(q), lattice.index_of(p));
    }
};

/// Families used on the two sides of the pairing (synthesis side applied to
/// T, analysis side paired against the result).
struct MatrixFamilies {
    Family applied = Family::Psi;
    Family paired = Family::Phi;
};

/// Generic construction: one operator application per column. Dense storage;
/// refuses lattices beyond a few thousand cubes.
OperatorMatrix build_matrix(const Operator& T, const LittlewoodPaleyPair& pair,
                            const TruncatedLattice& lattice, MatrixFamilies fams = {});

/// Fast path for convolution-type operators (pure multipliers): entries
/// depend only on (nu_P, nu_Q, x_P - x_Q); one FFT per scale pair.
OperatorMatrix build_matrix_convolution(const Operator& T, const LittlewoodPaleyPair& pair,
                                        const TruncatedLattice& lattice);

/// Difference tables A(nu_Q, nu_P, x_P - x_Q) for a multiplier operator: the
/// whole matrix over an arbitrarily large lattice in O(scales^2) FFTs.
class ConvolutionMatrixTables {
  public:
    ConvolutionMatrixTables(const Operator& T, const LittlewoodPaleyPair& pair,
                            const TruncatedLattice& lattice);

    Complex entry(const DyadicCube& q, const DyadicCube& p) const;
    const TruncatedLattice& lattice() const { return lattice_; }

  private:
    TruncatedLattice lattice_;
    std::vector<CArray> tables_;  // indexed by (nu_q - nu_min) * scales + (nu_p - nu_min)
};

/// Synthetic matrix with entries omega_{P,Q}(eps) (majorant test object).
OperatorMatrix omega_majorized_matrix(const LittlewoodPaleyPair& pair,
                                      const TruncatedLattice& lattice, double eps);

/// Streaming application of the omega majorant matrix (no dense storage).
Eigen::VectorXcd omega_majorized_apply(const TruncatedLattice& lattice, double eps,
                                       const Eigen::VectorXcd& s);

/// T = T_psi o A o S_phi (discrete representative acting on fields).
Operator matrix_operator(const OperatorMatrix& A, const LittlewoodPaleyPair& pair);

struct AdpVerdict {
    double eps = 0.0;
    double ratio = 0.0;  // max |A_{Q,P}| / omega_{P,Q}(eps)
    DyadicCube witness_q, witness_p;
    std::vector<std::pair<double, double>> eps_profile;  // (eps, ratio) over the grid
    bool monotone_in_eps = true;
};

/// r(eps) over a stored matrix, with the arg-max pair and an eps profile over
/// {0.25, 0.5, 1, 2}.
AdpVerdict adp_verdict(const OperatorMatrix& A, double eps);

/// Streaming r(eps) for multiplier operators over the full lattice, no
/// storage: exploits translation invariance per scale pair.
AdpVerdict adp_verdict_convolution(const Operator& T, const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice, double eps);

/// Largest |A(nu_Q, nu_P, .)| over scale pairs with |nu_P - nu_Q| >= 2; the
/// annular supports make these vanish identically.
double max_off_band_entry(const Operator& T, const LittlewoodPaleyPair& pair,
                          const TruncatedLattice& lattice);

struct DecayCheckReport {
    double fitted_constant = 0.0;      // C in the (1 + d/l)^{-(n+delta)} envelope
    double near_field_constant = 0.0;  // peak |T psi_Q| / (l(Q) |Q|^{-1/2})
    double far_slope = 0.0;            // log-log slope over the outer shells
    double slope_window_lo = 0.0, slope_window_hi = 0.0;  // normalized distances
    bool bound_holds = true;           // finite fit, no non-finite values
    bool edge_warning = false;         // cube scale near the lattice band edge
};

/// Pointwise decay of T(psi_Q) and T^t(phi_Q) against the envelope
/// C l(Q) |Q|^{-1/2} (1 + |x - x_Q| / l(Q))^{-(n+delta)}; the far-field
/// log-log slope is fitted over shells at normalized distances in
/// [slope_from, 0.4 L / l(Q)].
DecayCheckReport lemma41_decay_check(const Operator& T, const LittlewoodPaleyPair& pair,
                                     const DyadicCube& q, double delta,
                                     double slope_from = 64.0);

struct ConvolutionDecayReport {
    double c_g = 0.0, c_h = 0.0;       // fitted envelope constants of the inputs
    double c_g_diff = 0.0;             // fitted Hoelder-type constant of g
    double fitted_constant = 0.0;      // C in the convolution envelope
    double peak = 0.0;                 // |g * h| at x_1
    bool hypotheses_ok = false;
};

/// Convolution decay transfer: g at scale nu, h at scale mu >= nu with zero
/// mean, localized at x1; checks |g*h| against
/// 2^{-(mu-nu)(n/2+delta/2)} (1 + 2^nu |x - x1|)^{-(n+delta)}.
ConvolutionDecayReport lemma45_convolution_check(const SampledField& g, const SampledField& h,
                                                 int nu, int mu, double delta, const PointX& x1);

/// Pure-geometry lattice for the weight-calculus checks (no sampling grid):
/// all cubes Q_{nu k} of scales [nu_min, nu_max] in a periodic box of integer
/// side box_side.
struct GeometricLattice {
    int dimension = 2;
    std::int64_t box_side = 4;
    int nu_min = 0, nu_max = 2;

    std::vector<DyadicCube> cubes() const;
    double distance(const DyadicCube& p, const DyadicCube& q) const;
};

struct ProductBoundReport {
    double max_ratio = 0.0;            // sum_R W W / W(gamma1 ^ gamma2), worst sampled pair
    std::vector<double> per_lattice;   // one value per lattice in the growth ladder
    bool stable = false;               // relative spread within the tolerance
};

/// sum_R W_{P,R}(beta, gamma1) W_{R,Q}(beta, gamma2) <= C W_{P,Q}(beta, g1^g2)
/// over a ladder of growing geometric lattices; hypotheses beta, gamma > 0,
/// gamma1 != gamma2, gamma1 + gamma2 > 2 beta are enforced.
ProductBoundReport lemma51_product_check(double beta, double gamma1, double gamma2,
                                         const std::vector<GeometricLattice>& ladder,
                                         double stability_tol = 0.10, std::uint64_t seed = 51);

struct ScaleSumReport {
    double max_constant = 0.0;           // C = sum * lambda^alpha, worst case
    std::vector<double> per_truncation;  // max C per J
    bool stable = false;
};

/// sum_{nu, mu in [-J, J]} 2^{-|nu-mu| eps} 2^{(mu^nu) alpha} (1 + (2^mu^2^nu) lambda)^{-beta}
/// <= C lambda^{-alpha}, lambda sampled over two decades, J over the given
/// truncations; hypotheses beta > alpha > 0, lambda, eps > 0 are enforced.
ScaleSumReport lemma52_sum_check(double alpha, double beta, double eps,
                                 const std::vector<int>& truncations,
                                 double stability_tol = 0.10);

struct MatrixApplyReport {
    double source_norm = 0.0, target_norm = 0.0, ratio = 0.0;
    bool extrapolated_index = false;  // (alpha, p, q) outside the stated range
};

/// ||A s||_{f^{1+alpha,q}_p} / ||s||_{f^{alpha,q}_p}; indices outside
/// -1 <= alpha <= 0, 1 <= p, q < infinity run but are flagged.
MatrixApplyReport matrix_apply_bound(const OperatorMatrix& A, const CoefficientSequence& s,
                                     double alpha, double p, double q);

/// Lossless columnar text round trip of an operator matrix.
void write_matrix(std::ostream& os, const OperatorMatrix& A);
OperatorMatrix read_matrix(std::istream& is, const LittlewoodPaleyPair& pair,
                           const TruncatedLattice& lattice);

}  // namespace phikit
