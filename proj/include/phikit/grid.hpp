#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace phikit {

using Complex = std::complex<double>;
using CArray = Eigen::ArrayXcd;
using RArray = Eigen::ArrayXd;

// Small fixed-capacity vectors for points and integer tuples; the dimension is
// a runtime value but never exceeds kMaxDim.
inline constexpr int kMaxDim = 4;
using PointX = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using IndexX = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

inline bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

/// Sampling geometry of the periodic box [0, L)^n with N samples per axis.
/// Frequency modes are xi_m = (2*pi/L) * m with integer m in [-N/2, N/2).
struct GridSpec {
    int dimension = 2;
    double box_side = 64.0;
    int samples_per_axis = 256;

    GridSpec() = default;
    GridSpec(int n, double L, int N) : dimension(n), box_side(L), samples_per_axis(N) {
        validate();
    }

    void validate() const {
        if (dimension < 1 || dimension > kMaxDim)
            throw std::invalid_argument("GridSpec: dimension must be in [1, " +
                                        std::to_string(kMaxDim) + "]");
        if (!(box_side > 0.0)) throw std::invalid_argument("GridSpec: box side must be positive");
        if (!is_power_of_two(samples_per_axis))
            throw std::invalid_argument("GridSpec: samples per axis must be a power of two");
    }

    double spacing() const { return box_side / samples_per_axis; }
    double mode_spacing() const { return 2.0 * M_PI / box_side; }
    double nyquist() const { return M_PI / spacing(); }

    std::int64_t total_samples() const {
        std::int64_t t = 1;
        for (int a = 0; a < dimension; ++a) t *= samples_per_axis;
        return t;
    }

    /// n >= 2 is the setting the estimates are formulated in; n = 1 runs are
    /// allowed for smoke tests and labeled accordingly in reports.
    bool outside_standard_dimension() const { return dimension < 2; }

    bool operator==(const GridSpec& o) const {
        return dimension == o.dimension && box_side == o.box_side &&
               samples_per_axis == o.samples_per_axis;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

    // --- flat index arithmetic (C order, last axis contiguous) ---

    IndexX unflatten(std::int64_t flat) const {
        IndexX idx(dimension);
        for (int a = dimension - 1; a >= 0; --a) {
            idx[a] = flat % samples_per_axis;
            flat /= samples_per_axis;
        }
        return idx;
    }

    std::int64_t flatten(const IndexX& idx) const {
        std::int64_t flat = 0;
        for (int a = 0; a < dimension; ++a) {
            std::int64_t j = idx[a] % samples_per_axis;
            if (j < 0) j += samples_per_axis;
            flat = flat * samples_per_axis + j;
        }
        return flat;
    }

    /// Sample position x_j = j*h per axis, in [0, L)^n.
    PointX sample_point(std::int64_t flat) const {
        IndexX idx = unflatten(flat);
        PointX x(dimension);
        for (int a = 0; a < dimension; ++a) x[a] = idx[a] * spacing();
        return x;
    }

    /// Signed mode integer per axis: DFT bin j maps to j - N for j >= N/2.
    std::int64_t signed_mode(std::int64_t bin) const {
        return bin < samples_per_axis / 2 ? bin : bin - samples_per_axis;
    }

    IndexX mode_tuple(std::int64_t flat) const {
        IndexX idx = unflatten(flat);
        for (int a = 0; a < dimension; ++a) idx[a] = signed_mode(idx[a]);
        return idx;
    }

    /// Frequency vector xi_m of the given spectral bin.
    PointX mode_point(std::int64_t flat) const {
        IndexX m = mode_tuple(flat);
        PointX xi(dimension);
        for (int a = 0; a < dimension; ++a) xi[a] = m[a] * mode_spacing();
        return xi;
    }

    double mode_radius(std::int64_t flat) const {
        IndexX m = mode_tuple(flat);
        double s = 0.0;
        for (int a = 0; a < dimension; ++a) s += double(m[a]) * double(m[a]);
        return std::sqrt(s) * mode_spacing();
    }

    /// Centered representative of x in [-L/2, L/2) per axis.
    double centered(double x) const {
        double y = std::fmod(x, box_side);
        if (y < 0) y += box_side;
        return y >= box_side / 2 ? y - box_side : y;
    }

    PointX centered_point(const PointX& x) const {
        PointX y(dimension);
        for (int a = 0; a < dimension; ++a) y[a] = centered(x[a]);
        return y;
    }

    /// Torus distance between two points (min over periodic images).
    double torus_distance(const PointX& x, const PointX& y) const {
        double s = 0.0;
        for (int a = 0; a < dimension; ++a) {
            double d = centered(x[a] - y[a]);
            s += d * d;
        }
        return std::sqrt(s);
    }
};

}  // namespace phikit
