#include <phikit/fft.hpp>

#include <unsupported/Eigen/FFT>

#include <vector>

namespace phikit::detail {

void dft(const GridSpec& grid, CArray& data, bool inverse) {
    const int n = grid.dimension;
    const std::int64_t N = grid.samples_per_axis;
    const std::int64_t total = grid.total_samples();

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);

    std::vector<Complex> line(N), out(N);
    // Transform along each axis in turn; gather strided lines into a
    // contiguous buffer for the 1-D kernel.
    std::int64_t stride = 1;  // stride of the last axis
    for (int axis = n - 1; axis >= 0; --axis) {
        const std::int64_t block = stride * N;
        for (std::int64_t base = 0; base < total; base += block) {
            for (std::int64_t off = 0; off < stride; ++off) {
                const std::int64_t start = base + off;
                for (std::int64_t j = 0; j < N; ++j) line[j] = data[start + j * stride];
                if (inverse)
                    fft.inv(out, line);
                else
                    fft.fwd(out, line);
                for (std::int64_t j = 0; j < N; ++j) data[start + j * stride] = out[j];
            }
        }
        stride *= N;
    }
}

}  // namespace phikit::detail
