#pragma once

#include <phikit/operators.hpp>

namespace phikit {

/// Smoothness/integrability indices (alpha, p, q) of the function and
/// sequence space scales.
struct SpaceIndex {
    double alpha = 0.0;
    double p = 2.0;
    double q = 2.0;

    void validate() const;
    bool p_infinite() const { return std::isinf(p); }
    bool q_infinite() const { return std::isinf(q); }
    /// (p, q) in {(1, inf), (inf, 1)}: the excluded endpoint cases of the
    /// boundedness statements; runs are allowed but flagged.
    bool excluded_endpoint() const {
        return (p == 1.0 && q_infinite()) || (p_infinite() && q == 1.0);
    }
};

/// Sequence norm over the truncated lattice, all four branches:
///  - p, q finite:      || ( sum_Q (|Q|^{-a/n} |s_Q| chi~_Q)^q )^{1/q} ||_p
///  - p finite, q inf:  sup over scales inside the same L^p shell
///  - p inf, q finite:  sup_P ( |P|^{-1} sum_{Q in P} (|Q|^{-a/n-1/2+1/q}|s_Q|)^q )^{1/q}
///  - p = q = inf:      sup_Q |Q|^{-a/n-1/2} |s_Q|
double sequence_norm(const CoefficientSequence& s, const SpaceIndex& idx);

struct SequenceNormDetail {
    double value = 0.0;
    DyadicCube witness;      // arg-max P (p = inf branches)
    bool truncated_at_wall;  // inner sums hit the lattice's finest scale
};
SequenceNormDetail sequence_norm_detail(const CoefficientSequence& s, const SpaceIndex& idx);

/// Dyadic scale range [nu_min, nu_max]; the cube-free data needed by the
/// p < infinity norm branches (the p = infinity branches scan lattice cubes).
struct ScaleWindow {
    int nu_min = 0;
    int nu_max = 0;
};

/// Littlewood-Paley stack norm of a field: weights 2^{nu alpha} |phi_nu * f|
/// over the lattice's scales, combined per the (p, q) branch. The p = inf
/// branch scans lattice cubes P with the nu >= -log2 l(P) truncation.
double tl_norm(const SampledField& f, const SpaceIndex& idx, const LittlewoodPaleyPair& pair,
               const TruncatedLattice& lattice);

/// Cube-free variant over a bare scale window; valid for every branch except
/// p = infinity with q finite (which needs the cube scan).
double tl_norm(const SampledField& f, const SpaceIndex& idx, const LittlewoodPaleyPair& pair,
               const ScaleWindow& window);

/// Seeded real band-limited test field with spectrum inside the lattice's
/// covered band (complex Gaussian modes, Hermitian-symmetrized).
SampledField random_band_limited(const LittlewoodPaleyPair& pair, const TruncatedLattice& lattice,
                                 std::uint64_t seed);
SampledField random_band_limited(const LittlewoodPaleyPair& pair, const GridSpec& grid,
                                 const ScaleWindow& window, std::uint64_t seed);

struct RieszShiftReport {
    double shift = 0.0;
    double ratio = 0.0;        // tl_norm(I^s f, alpha + s) / tl_norm(f, alpha)
    double lower = 0.0, upper = 0.0;  // bracket from multiplier extremes over the band
    bool within_bracket = false;
};

/// Ratio check that I^s shifts the smoothness index: requires f band-limited
/// with spectrum bounded away from zero frequency.
RieszShiftReport riesz_shift_check(const SampledField& f, double s, const SpaceIndex& idx,
                                   const LittlewoodPaleyPair& pair,
                                   const TruncatedLattice& lattice);

struct RatioStatistics {
    std::string operator_name;
    SpaceIndex source, target;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    double q90_ratio = 0.0;
    std::vector<double> ratios;
    std::uint64_t seed = 0;
    int sample_count = 0;
};

/// Distribution of tl_norm(Tf, target) / tl_norm(f, source) over seeded
/// random band-limited fields; zero-norm draws are skipped.
RatioStatistics boundedness_ratio(const Operator& T, const SpaceIndex& source,
                                  const SpaceIndex& target, const LittlewoodPaleyPair& pair,
                                  const TruncatedLattice& lattice, int sample_count,
                                  std::uint64_t seed);
RatioStatistics boundedness_ratio(const Operator& T, const SpaceIndex& source,
                                  const SpaceIndex& target, const LittlewoodPaleyPair& pair,
                                  const ScaleWindow& window, int sample_count, std::uint64_t seed);

}  // namespace phikit
