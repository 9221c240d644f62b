#include <phikit/lp_frame.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace phikit {

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double AnnulusProfile::operator()(double r) const {
    if (r <= r0 || r >= r3) return 0.0;
    return smooth_step((r - r0) / (r1 - r0)) * smooth_step((r3 - r) / (r3 - r2));
}

double rho_of(const AnnulusProfile& phi, double r) {
    if (!(r > 0.0)) return 0.0;
    const int lo = int(std::floor(std::log2(phi.r0 / r))) - 1;
    const int hi = int(std::ceil(std::log2(phi.r3 / r))) + 1;
    double s = 0.0;
    for (int nu = lo; nu <= hi; ++nu) {
        const double v = phi(std::ldexp(r, nu));
        s += v * v;
    }
    return s;
}

namespace {

void check_edges(const AnnulusProfile& e) {
    const bool ok = 0.5 < e.r0 && e.r0 < e.r1 && e.r1 <= 0.6 && 5.0 / 3.0 <= e.r2 &&
                    e.r2 < e.r3 && e.r3 < 2.0;
    if (!ok)
        throw std::invalid_argument(
            "AnnulusProfile: edges must satisfy 1/2 < r0 < r1 <= 3/5 and 5/3 <= r2 < r3 < 2");
}

SampledField sample_profile_field(const GridSpec& grid, const AnnulusProfile& prof,
                                  bool dual /* psi */) {
    const std::int64_t total = grid.total_samples();
    const double conv = std::pow(2.0 * M_PI, -0.5 * grid.dimension);
    CArray spec(total);
    for (std::int64_t i = 0; i < total; ++i) {
        const double r = grid.mode_radius(i);
        double v = prof(r);
        if (dual && v != 0.0) v /= rho_of(prof, r);
        spec[i] = conv * v;
    }
    return SampledField::from_spectrum(grid, std::move(spec));
}

double measure_seam_amplitude(const SampledField& phi) {
    const GridSpec& g = phi.grid();
    const std::int64_t N = g.samples_per_axis;
    const double peak = phi.space().abs().maxCoeff();
    double seam = 0.0;
    // max |phi| over samples with some centered coordinate at the box edge
    for (std::int64_t i = 0; i < g.total_samples(); ++i) {
        IndexX idx = g.unflatten(i);
        bool on_seam = false;
        for (int a = 0; a < g.dimension; ++a)
            if (idx[a] == N / 2) on_seam = true;
        if (on_seam) seam = std::max(seam, std::abs(phi.space()[i]));
    }
    return peak > 0 ? seam / peak : 0.0;
}

}  // namespace

LittlewoodPaleyPair::LittlewoodPaleyPair(const GridSpec& grid, const AnnulusProfile& profile,
                                         bool counterexample_mode, double modulation_radius)
    : grid_(grid),
      profile_(profile),
      counterexample_mode_(counterexample_mode),
      modulation_radius_(modulation_radius),
      phi_(sample_profile_field(grid, profile, false)),
      psi_(sample_profile_field(grid, profile, true)),
      phi_at_origin_(phi_.space()[0].real()),
      seam_amplitude_(measure_seam_amplitude(phi_)) {
    check_edges(profile);
    if (!(phi_at_origin_ > 0.0))
        throw std::logic_error("LittlewoodPaleyPair: phi(0) must be positive");
}

double LittlewoodPaleyPair::psi_hat(double r) const {
    const double v = profile_(r);
    return v == 0.0 ? 0.0 : v / rho_of(profile_, r);
}

double LittlewoodPaleyPair::family_hat(Family fam, double r) const {
    switch (fam) {
        case Family::Phi: return phi_hat(r);
        case Family::Psi: return psi_hat(r);
        default: throw std::invalid_argument("family_hat: pair has no mollifier family");
    }
}

std::uint64_t LittlewoodPaleyPair::profile_hash() const {
    // FNV-1a over the defining parameters
    auto mix = [](std::uint64_t h, std::uint64_t v) {
        h ^= v;
        return h * 1099511628211ull;
    };
    std::uint64_t h = 14695981039346656037ull;
    auto bits = [](double x) {
        std::uint64_t u;
        static_assert(sizeof(u) == sizeof(x));
        std::memcpy(&u, &x, sizeof(u));
        return u;
    };
    h = mix(h, bits(profile_.r0));
    h = mix(h, bits(profile_.r1));
    h = mix(h, bits(profile_.r2));
    h = mix(h, bits(profile_.r3));
    h = mix(h, counterexample_mode_ ? 1 : 0);
    h = mix(h, bits(modulation_radius_));
    h = mix(h, std::uint64_t(grid_.dimension));
    h = mix(h, bits(grid_.box_side));
    h = mix(h, std::uint64_t(grid_.samples_per_axis));
    return h;
}

double MollifierProfile::operator()(double r) const {
    if (r >= support_radius) return 0.0;
    if (r <= flat_radius) return 1.0;
    return smooth_step((support_radius - r) / (support_radius - flat_radius));
}

LittlewoodPaleyPair build_lp_pair(const GridSpec& grid, const AnnulusProfile& edges) {
    check_edges(edges);
    return LittlewoodPaleyPair(grid, edges);
}

LittlewoodPaleyPair build_counterexample_pair(const GridSpec& grid) {
    const AnnulusProfile edges{0.55, 0.60, 5.0 / 3.0, 1.85};
    const double eps = 0.05;

    // The ball B(e_1, eps) must contain at least one grid mode, and the dilated
    // supports must be certifiable by scanning grid modes.
    const double spacing = grid.mode_spacing();
    bool ball_resolved = false;
    const int reach = int(std::ceil((1.0 + eps) / spacing)) + 1;
    for (int m = -reach; m <= reach && !ball_resolved; ++m) {
        // axis-1 modes (m, 0, ..., 0)
        const double d = std::abs(m * spacing - 1.0);
        if (d <= eps) ball_resolved = true;
    }
    if (!ball_resolved || 2.0 * (1.0 + eps) > grid.nyquist())
        throw std::domain_error(
            "build_counterexample_pair: grid cannot certify the ball conditions; need mode "
            "spacing <= " +
            std::to_string(eps) + " near e_1 (box side >= " + std::to_string(2.0 * M_PI / eps) +
            " or e_1 on the mode lattice) and Nyquist > " + std::to_string(2.0 * (1.0 + eps) / 0.9));

    LittlewoodPaleyPair pair(grid, edges, true, eps);

    // Certify: phi_hat == 1 on sampled B(e_1, eps), and both adjacent dilates
    // vanish there (exhaustive scan over modes in the ball).
    const std::int64_t total = grid.total_samples();
    for (std::int64_t i = 0; i < total; ++i) {
        PointX xi = grid.mode_point(i);
        double d2 = (xi[0] - 1.0) * (xi[0] - 1.0);
        for (int a = 1; a < grid.dimension; ++a) d2 += xi[a] * xi[a];
        if (d2 > eps * eps) continue;
        const double r = xi.norm();
        if (pair.phi_hat(r) != 1.0 || pair.phi_hat(2.0 * r) != 0.0 || pair.phi_hat(0.5 * r) != 0.0)
            throw std::logic_error("build_counterexample_pair: ball conditions violated on grid");
    }
    return pair;
}

PairReport validate_pair(const LittlewoodPaleyPair& pair, std::uint64_t seed) {
    const GridSpec& g = pair.grid();
    PairReport rep;
    rep.seam_amplitude = pair.seam_amplitude();

    const AnnulusProfile& prof = pair.profile();
    const std::int64_t total = g.total_samples();

    double c = std::numeric_limits<double>::infinity();
    double support_violation = 0.0;
    double sym_gap = 0.0;
    for (std::int64_t i = 0; i < total; ++i) {
        const double r = g.mode_radius(i);
        const double v = pair.phi_hat(r);
        if (r >= 0.6 && r <= 5.0 / 3.0) c = std::min(c, std::abs(v));
        if (!(r > prof.r0 && r < prof.r3)) support_violation = std::max(support_violation, std::abs(v));
        // radial symmetry: compare against the value at the reversed index tuple
        IndexX m = g.mode_tuple(i);
        IndexX rev(g.dimension);
        for (int a = 0; a < g.dimension; ++a) rev[a] = m[g.dimension - 1 - a];
        double s = 0.0;
        for (int a = 0; a < g.dimension; ++a) s += double(rev[a]) * double(rev[a]);
        const double vrev = pair.phi_hat(std::sqrt(s) * g.mode_spacing());
        sym_gap = std::max(sym_gap, std::abs(v - vrev));
    }
    // fine sweep of the lower bound over the analytic profile as well
    for (int k = 0; k <= 4096; ++k) {
        const double r = 0.6 + k * (5.0 / 3.0 - 0.6) / 4096.0;
        c = std::min(c, std::abs(pair.phi_hat(r)));
    }
    rep.lower_bound_c = std::isfinite(c) ? c : 0.0;
    rep.support_violation = support_violation;
    rep.radial_symmetry_gap = sym_gap;

    // partition of unity at random covered radii
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logr(std::log(0.05), std::log(50.0));
    double dev = 0.0;
    double rho_min = std::numeric_limits<double>::infinity(), rho_max = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double r = std::exp(logr(rng));
        double s = 0.0;
        for (int nu = -30; nu <= 30; ++nu) {
            const double rr = std::ldexp(r, -nu);
            s += pair.phi_hat(rr) * pair.psi_hat(rr);
        }
        dev = std::max(dev, std::abs(s - 1.0));
        const double rho = pair.rho(r);
        rho_min = std::min(rho_min, rho);
        rho_max = std::max(rho_max, rho);
    }
    rep.partition_max_deviation = dev;
    rep.rho_min = rho_min;
    rep.rho_max = rho_max;

    rep.admissible = rep.lower_bound_c > 0.0 && rep.support_violation == 0.0 &&
                     rep.partition_max_deviation <= 1e-10 && rep.radial_symmetry_gap <= 1e-12;
    return rep;
}

int max_regularizer_level(const LittlewoodPaleyPair& pair) {
    const GridSpec& g = pair.grid();
    // j admissible while the shrunken annulus (r0, r3)*2^{-j} still contains a
    // nonzero mode radius; the fundamental mode is the first to drop out.
    int j = 0;
    while (true) {
        const double hi = std::ldexp(pair.profile().r3, -(j + 1));
        if (hi <= g.mode_spacing()) break;
        ++j;
        if (j > 62) break;
    }
    return j;
}

SampledField regularizer(const LittlewoodPaleyPair& pair, int j) {
    if (j < 0) throw std::invalid_argument("regularizer: j must be nonnegative");
    const GridSpec& g = pair.grid();
    if (std::ldexp(pair.profile().r3, -j) <= g.mode_spacing())
        throw std::domain_error("regularizer: scale out of range for the box (j too large)");
    const std::int64_t total = g.total_samples();
    const double conv = std::pow(2.0 * M_PI, -0.5 * g.dimension);
    const double amp = std::pow(2.0, double(j) * g.dimension);
    CArray spec(total);
    for (std::int64_t i = 0; i < total; ++i) {
        const double r = g.mode_radius(i);
        spec[i] = conv * amp * pair.phi_hat(std::ldexp(r, j));
    }
    SampledField raw = SampledField::from_spectrum(g, std::move(spec));
    const Complex at0 = raw.space()[0];
    if (std::abs(at0) == 0.0) throw std::domain_error("regularizer: degenerate normalization");
    return raw * (1.0 / at0);
}

Mollifier build_mollifier(const GridSpec& grid) {
    MollifierProfile prof;
    const std::int64_t total = grid.total_samples();
    const double conv = std::pow(2.0 * M_PI, -0.5 * grid.dimension);
    CArray spec(total);
    for (std::int64_t i = 0; i < total; ++i) spec[i] = conv * prof(grid.mode_radius(i));
    return Mollifier{grid, prof, SampledField::from_spectrum(grid, std::move(spec))};
}

}  // namespace phikit
