#pragma once

#include <phikit/field.hpp>

#include <array>
#include <optional>

namespace phikit {

/// C-infinity step built from exp(-1/t): 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);

/// Radial bump profile for the frequency side of a Littlewood-Paley function:
/// rises over [r0, r1], equals 1 on [r1, r2], falls over [r2, r3]. Profiles
/// are stored in the normalization in which the partition of unity
/// sum_nu phi_hat * psi_hat (2^{-nu} xi) equals 1; sampled field spectra then
/// carry the factor (2*pi)^{-n/2} of the continuous transform convention.
struct AnnulusProfile {
    double r0 = 0.505, r1 = 0.600, r2 = 5.0 / 3.0, r3 = 1.980;

    double operator()(double r) const;
    bool supported(double r) const { return r > r0 && r < r3; }
};

/// rho(r) = sum_nu phi_hat(2^nu r)^2; dyadic-dilation invariant, and at most
/// two terms are nonzero for the admissible edge geometry.
double rho_of(const AnnulusProfile& phi, double r);

enum class Family { Phi, Psi, Moll };

/// An admissible pair (phi, psi) sampled on a grid, with psi_hat = phi_hat/rho.
class LittlewoodPaleyPair {
  public:
    LittlewoodPaleyPair(const GridSpec& grid, const AnnulusProfile& profile,
                        bool counterexample_mode = false, double modulation_radius = 0.0);

    const GridSpec& grid() const { return grid_; }
    const AnnulusProfile& profile() const { return profile_; }
    bool counterexample_mode() const { return counterexample_mode_; }
    double modulation_radius() const { return modulation_radius_; }

    double phi_hat(double r) const { return profile_(r); }
    double psi_hat(double r) const;
    double rho(double r) const { return rho_of(profile_, r); }

    /// Profile value for the requested family (Moll refers to a mollifier
    /// profile owned elsewhere; the pair only exposes Phi and Psi).
    double family_hat(Family fam, double r) const;

    const SampledField& phi() const { return phi_; }
    const SampledField& psi() const { return psi_; }
    double phi_at_origin() const { return phi_at_origin_; }

    /// Relative magnitude of phi on the box seam (wrap contamination scale);
    /// a measured property of the profile/box combination.
    double seam_amplitude() const { return seam_amplitude_; }

    /// Stable fingerprint of the construction parameters, used in file headers.
    std::uint64_t profile_hash() const;

  private:
    GridSpec grid_;
    AnnulusProfile profile_;
    bool counterexample_mode_;
    double modulation_radius_;
    SampledField phi_;
    SampledField psi_;
    double phi_at_origin_;
    double seam_amplitude_;
};

/// Smooth low-pass profile for the paraproduct mollifier: identically 1 on
/// B(0, flat_radius), supported in B(0, support_radius) inside the unit ball.
struct MollifierProfile {
    double flat_radius = 0.5;
    double support_radius = 0.95;
    double operator()(double r) const;
};

struct Mollifier {
    GridSpec grid;
    MollifierProfile profile;
    SampledField field;
};

/// Validation data for every constructed pair.
struct PairReport {
    double lower_bound_c = 0.0;          // measured min |phi_hat| on [3/5, 5/3]
    double support_violation = 0.0;      // max |phi_hat| at modes outside the annulus
    double partition_max_deviation = 0.0;
    double rho_min = 0.0, rho_max = 0.0;
    double radial_symmetry_gap = 0.0;
    double seam_amplitude = 0.0;
    bool admissible = false;
};

LittlewoodPaleyPair build_lp_pair(const GridSpec& grid, const AnnulusProfile& edges = {});

/// The pair with the extra flatness/vanishing structure around e_1 used by the
/// modulated-symbol construction: phi_hat == 1 on B(e_1, eps) while the
/// adjacent dyadic dilates vanish there. Refuses grids whose mode lattice
/// cannot certify the ball conditions.
LittlewoodPaleyPair build_counterexample_pair(const GridSpec& grid);

PairReport validate_pair(const LittlewoodPaleyPair& pair, std::uint64_t seed = 7001);

/// eta^j = phi(./2^j) / phi(0), constructed spectrally; eta^j(0) = 1 exactly.
/// Throws std::domain_error once the dilated annulus drops below the mode
/// lattice (scale out of range for the box).
SampledField regularizer(const LittlewoodPaleyPair& pair, int j);

/// Largest admissible j for regularizer() on the pair's grid.
int max_regularizer_level(const LittlewoodPaleyPair& pair);

Mollifier build_mollifier(const GridSpec& grid);

}  // namespace phikit
