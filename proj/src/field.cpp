#include <phikit/field.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace phikit {

namespace {

double transform_forward_weight(const GridSpec& g) {
    return std::pow(2.0 * M_PI, -0.5 * g.dimension) * std::pow(g.spacing(), g.dimension);
}

double transform_inverse_weight(const GridSpec& g) {
    return std::pow(2.0 * M_PI, -0.5 * g.dimension) * std::pow(g.mode_spacing(), g.dimension);
}

void require_finite(const CArray& v, const char* what) {
    if (!v.isFinite().all()) throw std::invalid_argument(std::string(what) + ": non-finite samples");
}

}  // namespace

SampledField SampledField::from_space(const GridSpec& grid, CArray space) {
    grid.validate();
    if (space.size() != grid.total_samples())
        throw std::invalid_argument("SampledField: sample count does not match grid");
    require_finite(space, "SampledField");
    CArray spec = space;
    detail::dft(grid, spec, /*inverse=*/false);
    spec *= transform_forward_weight(grid);
    return SampledField(grid, std::make_shared<const CArray>(std::move(space)),
                        std::make_shared<const CArray>(std::move(spec)));
}

SampledField SampledField::from_spectrum(const GridSpec& grid, CArray spectrum) {
    grid.validate();
    if (spectrum.size() != grid.total_samples())
        throw std::invalid_argument("SampledField: mode count does not match grid");
    require_finite(spectrum, "SampledField");
    CArray space = spectrum;
    detail::dft(grid, space, /*inverse=*/true);
    space *= transform_inverse_weight(grid);
    return SampledField(grid, std::make_shared<const CArray>(std::move(space)),
                        std::make_shared<const CArray>(std::move(spectrum)));
}

SampledField SampledField::operator+(const SampledField& o) const {
    if (grid_ != o.grid_) throw std::invalid_argument("field sum: grid mismatch");
    return from_spectrum(grid_, spectrum() + o.spectrum());
}

SampledField SampledField::operator-(const SampledField& o) const {
    if (grid_ != o.grid_) throw std::invalid_argument("field difference: grid mismatch");
    return from_spectrum(grid_, spectrum() - o.spectrum());
}

SampledField SampledField::operator*(Complex c) const {
    return from_spectrum(grid_, CArray(spectrum() * c));
}

SampledField pointwise_product(const SampledField& f, const SampledField& g) {
    if (f.grid() != g.grid()) throw std::invalid_argument("pointwise product: grid mismatch");
    return SampledField::from_space(f.grid(), CArray(f.space() * g.space()));
}

Complex inner_product(const SampledField& f, const SampledField& g) {
    if (f.grid() != g.grid()) throw std::invalid_argument("inner product: grid mismatch");
    // evaluated in frequency (Parseval): exact zeros for disjoint spectral
    // supports, which several cancellation identities rely on
    const double w = std::pow(f.grid().mode_spacing(), f.grid().dimension);
    return (f.spectrum() * g.spectrum().conjugate()).sum() * w;
}

double lp_norm(const SampledField& f, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) return f.space().abs().maxCoeff();
    const double w = std::pow(f.grid().spacing(), f.grid().dimension);
    if (p == 2.0) return std::sqrt((f.space().abs2().sum()) * w);
    return std::pow((f.space().abs().pow(p)).sum() * w, 1.0 / p);
}

SampledField translate(const SampledField& f, const PointX& shift) {
    const GridSpec& g = f.grid();
    if (shift.size() != g.dimension) throw std::invalid_argument("translate: dimension mismatch");
    const std::int64_t total = g.total_samples();
    CArray spec(total);
    for (std::int64_t i = 0; i < total; ++i) {
        PointX xi = g.mode_point(i);
        double phase = 0.0;
        for (int a = 0; a < g.dimension; ++a) phase -= shift[a] * xi[a];
        spec[i] = f.spectrum()[i] * std::polar(1.0, phase);
    }
    return SampledField::from_spectrum(g, std::move(spec));
}

SampledField modulate(const SampledField& f, const IndexX& mode) {
    const GridSpec& g = f.grid();
    if (mode.size() != g.dimension) throw std::invalid_argument("modulate: dimension mismatch");
    const std::int64_t total = g.total_samples();
    CArray spec = CArray::Zero(total);
    for (std::int64_t i = 0; i < total; ++i) {
        IndexX m = g.unflatten(i);
        for (int a = 0; a < g.dimension; ++a) m[a] -= mode[a];
        spec[i] = f.spectrum()[g.flatten(m)];
    }
    return SampledField::from_spectrum(g, std::move(spec));
}

SampledField second_difference(const SampledField& f, const IndexX& lattice_shift) {
    const GridSpec& g = f.grid();
    if (lattice_shift.size() != g.dimension)
        throw std::invalid_argument("second_difference: dimension mismatch");
    const std::int64_t total = g.total_samples();
    CArray out(total);
    for (std::int64_t i = 0; i < total; ++i) {
        IndexX idx = g.unflatten(i);
        IndexX plus = idx, minus = idx;
        for (int a = 0; a < g.dimension; ++a) {
            plus[a] += lattice_shift[a];
            minus[a] -= lattice_shift[a];
        }
        out[i] = f.space()[g.flatten(minus)] + f.space()[g.flatten(plus)] - 2.0 * f.space()[i];
    }
    return SampledField::from_space(g, std::move(out));
}

SampledField dilate(const SampledField& f, int nu) {
    const GridSpec& g = f.grid();
    if (nu == 0) return f;
    const std::int64_t N = g.samples_per_axis;
    const std::int64_t total = g.total_samples();
    constexpr double kMassTol = 1e-16;

    if (nu > 0) {
        // Compression: sample 2^nu * x in centered coordinates, zero outside.
        // Decimation would alias spectral content beyond Nyquist / 2^nu.
        if ((std::int64_t(1) << nu) >= N)
            throw std::domain_error("dilate: scale out of range (below one sample)");
        double outside = 0.0, total_mass = 0.0;
        const std::int64_t keep = (N / 2) >> nu;
        for (std::int64_t i = 0; i < total; ++i) {
            const double a2 = std::norm(f.spectrum()[i]);
            total_mass += a2;
            IndexX m = g.mode_tuple(i);
            for (int a = 0; a < g.dimension; ++a)
                if (m[a] < -keep || m[a] >= keep) { outside += a2; break; }
        }
        if (outside > kMassTol * std::max(total_mass, 1e-300))
            throw std::domain_error("dilate: scale out of range (content below one sample)");

        const double amp = std::pow(2.0, double(nu) * g.dimension);
        const std::int64_t half = N / 2;
        CArray out(total);
        for (std::int64_t i = 0; i < total; ++i) {
            IndexX idx = g.unflatten(i);
            bool inside = true;
            IndexX src(g.dimension);
            for (int a = 0; a < g.dimension; ++a) {
                std::int64_t c = idx[a] < half ? idx[a] : idx[a] - N;   // centered index
                std::int64_t t = c << nu;
                if (t < -half || t >= half) { inside = false; break; }
                src[a] = t;
            }
            out[i] = inside ? amp * f.space()[g.flatten(src)] : Complex(0.0, 0.0);
        }
        return SampledField::from_space(g, std::move(out));
    }

    // Expansion: evaluate the trigonometric interpolant at x / 2^|nu|. Only
    // the central window |x| < L / 2^{|nu|+1} of f is visible afterwards, so
    // content outside it must be negligible.
    const int k = -nu;
    const std::int64_t factor = std::int64_t(1) << k;
    if (factor >= N) throw std::domain_error("dilate: scale out of range (beyond box)");
    {
        double outside = 0.0, total_mass = 0.0;
        const double window = g.box_side / double(2 * factor);
        for (std::int64_t i = 0; i < total; ++i) {
            const double a2 = std::norm(f.space()[i]);
            total_mass += a2;
            PointX x = g.centered_point(g.sample_point(i));
            for (int a = 0; a < g.dimension; ++a)
                if (std::abs(x[a]) >= window) { outside += a2; break; }
        }
        if (outside > kMassTol * std::max(total_mass, 1e-300))
            throw std::domain_error("dilate: scale out of range (essential support beyond box)");
    }

    GridSpec fine(g.dimension, g.box_side, int(N * factor));
    CArray fine_spec = CArray::Zero(fine.total_samples());
    for (std::int64_t i = 0; i < total; ++i) {
        IndexX m = g.mode_tuple(i);
        fine_spec[fine.flatten(m)] = f.spectrum()[i];
    }
    SampledField fine_field = SampledField::from_spectrum(fine, std::move(fine_spec));

    // x_j / 2^k = c * h / 2^k = c * h_fine, so the centered coarse index c is
    // directly a centered index on the fine lattice.
    const double amp = std::pow(2.0, double(nu) * g.dimension);
    const std::int64_t half = N / 2;
    CArray out(total);
    for (std::int64_t i = 0; i < total; ++i) {
        IndexX idx = g.unflatten(i);
        IndexX src(g.dimension);
        for (int a = 0; a < g.dimension; ++a) src[a] = idx[a] < half ? idx[a] : idx[a] - N;
        out[i] = amp * fine_field.space()[fine.flatten(src)];
    }
    return SampledField::from_space(g, std::move(out));
}

SampledField hl_maximal(const SampledField& f) {
    const GridSpec& g = f.grid();
    const std::int64_t N = g.samples_per_axis;
    const std::int64_t total = g.total_samples();

    RArray absf = f.space().abs();
    RArray best = absf;  // radius 0

    std::vector<double> buf(total);
    for (std::int64_t r = 1; r <= N / 2; r *= 2) {
        // Separable periodic box sum of side 2r+1 via per-axis sliding windows.
        RArray acc = absf;
        std::int64_t stride = 1;
        for (int axis = g.dimension - 1; axis >= 0; --axis) {
            const std::int64_t block = stride * N;
            for (std::int64_t base = 0; base < total; base += block) {
                for (std::int64_t off = 0; off < stride; ++off) {
                    const std::int64_t start = base + off;
                    double window = 0.0;
                    for (std::int64_t j = -r; j <= r; ++j) {
                        std::int64_t jj = (j % N + N) % N;
                        window += acc[start + jj * stride];
                    }
                    for (std::int64_t j = 0; j < N; ++j) {
                        buf[start + j * stride] = window;
                        std::int64_t leave = ((j - r) % N + N) % N;
                        std::int64_t enter = ((j + r + 1) % N + N) % N;
                        window += acc[start + enter * stride] - acc[start + leave * stride];
                    }
                }
            }
            for (std::int64_t i = 0; i < total; ++i) acc[i] = buf[i];
            stride *= N;
        }
        const double side = double(2 * r + 1);
        double inv_count = 1.0;
        for (int a = 0; a < g.dimension; ++a) inv_count /= side;
        for (std::int64_t i = 0; i < total; ++i) best[i] = std::max(best[i], acc[i] * inv_count);
    }

    CArray out(total);
    for (std::int64_t i = 0; i < total; ++i) out[i] = best[i];
    return SampledField::from_space(g, std::move(out));
}

double max_abs_difference(const SampledField& f, const SampledField& g) {
    if (f.grid() != g.grid()) throw std::invalid_argument("max_abs_difference: grid mismatch");
    return (f.space() - g.space()).abs().maxCoeff();
}

double roundtrip_error(const SampledField& f) {
    CArray spec = f.spectrum();
    SampledField back = SampledField::from_spectrum(f.grid(), std::move(spec));
    double denom = f.space().abs().maxCoeff();
    if (denom == 0.0) return (back.space() - f.space()).abs().maxCoeff();
    return (back.space() - f.space()).abs().maxCoeff() / denom;
}

double parseval_gap(const SampledField& f) {
    const GridSpec& g = f.grid();
    const double space_side = f.space().abs2().sum() * std::pow(g.spacing(), g.dimension);
    const double freq_side = f.spectrum().abs2().sum() * std::pow(g.mode_spacing(), g.dimension);
    if (space_side == 0.0) return freq_side;
    return std::abs(space_side - freq_side) / space_side;
}

}  // namespace phikit
