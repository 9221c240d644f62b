#pragma once

#include <phikit/lattice.hpp>

#include <iosfwd>

namespace phikit {

/// Cube-indexed coefficients s = {s_Q} over a truncated lattice.
struct CoefficientSequence {
    TruncatedLattice lattice;
    Eigen::VectorXcd values;

    Complex operator[](const DyadicCube& q) const { return values[lattice.index_of(q)]; }
};

/// (S_phi f)_Q = <f, phi_Q> for every lattice cube, computed in frequency;
/// exact for band-limited f. One inverse FFT per scale.
CoefficientSequence analyze(const SampledField& f, const LittlewoodPaleyPair& pair,
                            const TruncatedLattice& lattice, Family fam = Family::Phi);

/// T_psi s = sum_Q s_Q psi_Q, accumulated scale by scale in frequency.
SampledField synthesize(const CoefficientSequence& s, const LittlewoodPaleyPair& pair,
                        Family fam = Family::Psi);

/// Mollifier-family analysis <f, Moll_Q> (used by paraproducts).
CoefficientSequence analyze_mollifier(const SampledField& f, const Mollifier& moll,
                                      const TruncatedLattice& lattice);

/// || f - T_psi S_phi f ||_2 / ||f||_2 (absolute residual when ||f||_2 = 0).
double reconstruction_residual(const SampledField& f, const LittlewoodPaleyPair& pair,
                               const TruncatedLattice& lattice);

/// Fraction of the spectral mass of f lying on modes not covered by the
/// lattice's partition of unity.
double uncovered_spectral_fraction(const SampledField& f, const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice);

struct PairingExpansion {
    Complex expansion;       // sum_Q <f, phi_Q><psi_Q, g>
    Complex direct;          // <f, g>
    double deviation;        // |expansion - direct|
    bool coverage_warning;   // g (or f) has meaningful uncovered spectral mass
};

/// Theorem-2.7-style expansion of <f, g> through the frame coefficients.
PairingExpansion pairing_expansion(const SampledField& f, const SampledField& g,
                                   const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice);

/// Columnar text serialization: one record (nu, k..., re, im) per cube.
void write_coefficients(std::ostream& os, const CoefficientSequence& s);
Eigen::VectorXcd read_coefficients(std::istream& is, const TruncatedLattice& lattice);

}  // namespace phikit
