#include "srm/grid.hpp"

#include <cmath>
#include <complex>

#include "srm/fft.hpp"

namespace srm::grid {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Mirror an out-of-range index about the edge samples (period 2n-2),
// i.e. [a,b,c] extends to ... b | a b c | b ...
std::size_t mirror_index(long long i, std::size_t n) {
    if (n == 1) return 0;
    const long long period = 2 * static_cast<long long>(n) - 2;
    long long j = i % period;
    if (j < 0) j += period;
    if (j >= static_cast<long long>(n)) j = period - j;
    return static_cast<std::size_t>(j);
}

// Half-spectrum of the isotropic Gaussian frequency response.
std::vector<double> gaussian_filter_half(std::size_t rows, std::size_t cols,
                                         double sigma_px) {
    const std::size_t hc = fft::half_cols(cols);
    std::vector<double> w(rows * hc);
    const double c = -2.0 * kPi * kPi * sigma_px * sigma_px;
    for (std::size_t i = 0; i < rows; ++i) {
        const double fr = (i <= rows / 2 ? static_cast<double>(i)
                                         : static_cast<double>(i) - static_cast<double>(rows)) /
                          static_cast<double>(rows);
        for (std::size_t j = 0; j < hc; ++j) {
            const double fc = static_cast<double>(j) / static_cast<double>(cols);
            w[i * hc + j] = std::exp(c * (fr * fr + fc * fc));
        }
    }
    return w;
}

}  // namespace

void hartley_transform(std::size_t rows, std::size_t cols,
                       const std::vector<double>& in, std::vector<double>& out) {
    if (in.size() != rows * cols)
        throw config_error("hartley_transform: shape mismatch");
    if (!all_finite(in))
        throw numerical_error("hartley_transform: non-finite input");

    const std::size_t hc = fft::half_cols(cols);
    std::vector<std::complex<double>> spec(rows * hc);
    fft::forward_r2c(rows, cols, in.data(), spec.data());

    out.resize(rows * cols);
    const double norm = 1.0 / std::sqrt(static_cast<double>(rows) *
                                        static_cast<double>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            double re, im;
            if (j < hc) {
                re = spec[i * hc + j].real();
                im = spec[i * hc + j].imag();
            } else {
                // Hermitian symmetry of the real-input DFT.
                const std::size_t ic = (rows - i) % rows;
                const std::size_t jc = cols - j;
                re = spec[ic * hc + jc].real();
                im = -spec[ic * hc + jc].imag();
            }
            out[i * cols + j] = (re - im) * norm;
        }
    }
}

Image hartley_transform(const Image& field) {
    Image out(field.spec);
    hartley_transform(field.spec.n_rows, field.spec.m_cols, field.values, out.values);
    return out;
}

Image convolve_gaussian(const Image& field, double sigma_um) {
    if (!(sigma_um > 0.0))
        throw config_error("convolve_gaussian: sigma must be > 0");
    field.spec.validate();
    if (!all_finite(field.values))
        throw numerical_error("convolve_gaussian: non-finite input");
    const double sigma_px = sigma_um / field.spec.pixel_size_um;
    if (sigma_px < kMinSigmaPx) return field;

    const std::size_t rows = field.spec.n_rows, cols = field.spec.m_cols;
    const std::size_t hc = fft::half_cols(cols);
    const std::vector<double> w = gaussian_filter_half(rows, cols, sigma_px);

    std::vector<std::complex<double>> spec(rows * hc);
    fft::forward_r2c(rows, cols, field.values.data(), spec.data());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= w[i];

    Image out(field.spec);
    fft::inverse_c2r(rows, cols, spec.data(), out.values.data());
    const double scale = 1.0 / (static_cast<double>(rows) * static_cast<double>(cols));
    for (double& v : out.values) v *= scale;
    return out;
}

std::size_t conv_margin(std::size_t extent, double sigma_px) {
    std::size_t margin = static_cast<std::size_t>(std::ceil(3.0 * sigma_px));
    while (fft::good_size(extent + 2 * margin) != extent + 2 * margin) ++margin;
    return margin;
}

std::vector<double> gaussian_filter_power(const GridSpec& spec, double sigma_um) {
    const std::size_t rows = spec.n_rows, cols = spec.m_cols;
    const double sigma_px = sigma_um / spec.pixel_size_um;
    std::vector<double> power(rows * cols, 1.0);
    if (sigma_px < kMinSigmaPx) return power;

    const double c = -2.0 * kPi * kPi * sigma_px * sigma_px;
    for (std::size_t i = 0; i < rows; ++i) {
        const double fr = (i <= rows / 2 ? static_cast<double>(i)
                                         : static_cast<double>(i) - static_cast<double>(rows)) /
                          static_cast<double>(rows);
        for (std::size_t j = 0; j < cols; ++j) {
            const double fc = (j <= cols / 2 ? static_cast<double>(j)
                                             : static_cast<double>(j) - static_cast<double>(cols)) /
                              static_cast<double>(cols);
            const double g = std::exp(c * (fr * fr + fc * fc));
            power[i * cols + j] = g * g;
        }
    }
    return power;
}

Image pad_reflect(const Image& field, std::size_t margin) {
    return pad_reflect(field, margin, margin);
}

Image pad_reflect(const Image& field, std::size_t margin_rows, std::size_t margin_cols) {
    const std::size_t n = field.spec.n_rows, m = field.spec.m_cols;
    GridSpec out_spec{n + 2 * margin_rows, m + 2 * margin_cols, field.spec.pixel_size_um};
    Image out(out_spec);
    for (std::size_t i = 0; i < out_spec.n_rows; ++i) {
        const std::size_t si =
            mirror_index(static_cast<long long>(i) - static_cast<long long>(margin_rows), n);
        for (std::size_t j = 0; j < out_spec.m_cols; ++j) {
            const std::size_t sj =
                mirror_index(static_cast<long long>(j) - static_cast<long long>(margin_cols), m);
            out.at(i, j) = field.at(si, sj);
        }
    }
    return out;
}

Image crop(const Image& field, std::size_t margin) {
    return crop(field, margin, margin);
}

Image pad_reflect_adjoint(const Image& padded, std::size_t margin_rows,
                          std::size_t margin_cols) {
    if (padded.spec.n_rows <= 2 * margin_rows || padded.spec.m_cols <= 2 * margin_cols)
        throw config_error("pad_reflect_adjoint: margin too large");
    const std::size_t n = padded.spec.n_rows - 2 * margin_rows;
    const std::size_t m = padded.spec.m_cols - 2 * margin_cols;
    Image out(GridSpec{n, m, padded.spec.pixel_size_um}, 0.0);
    for (std::size_t i = 0; i < padded.spec.n_rows; ++i) {
        const std::size_t si =
            mirror_index(static_cast<long long>(i) - static_cast<long long>(margin_rows), n);
        for (std::size_t j = 0; j < padded.spec.m_cols; ++j) {
            const std::size_t sj =
                mirror_index(static_cast<long long>(j) - static_cast<long long>(margin_cols), m);
            out.at(si, sj) += padded.at(i, j);
        }
    }
    return out;
}

Image crop(const Image& field, std::size_t margin_rows, std::size_t margin_cols) {
    const std::size_t n = field.spec.n_rows, m = field.spec.m_cols;
    if (2 * margin_rows >= n || 2 * margin_cols >= m)
        throw config_error("crop: margin too large");
    return extract_window(field, margin_rows, margin_cols, n - 2 * margin_rows,
                          m - 2 * margin_cols);
}

Image extract_window(const Image& field, std::size_t row0, std::size_t col0,
                     std::size_t n_rows, std::size_t m_cols) {
    if (row0 + n_rows > field.spec.n_rows || col0 + m_cols > field.spec.m_cols)
        throw config_error("extract_window: window exceeds field");
    Image out(GridSpec{n_rows, m_cols, field.spec.pixel_size_um});
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t j = 0; j < m_cols; ++j)
            out.at(i, j) = field.at(row0 + i, col0 + j);
    return out;
}

Image embed_window(const Image& inner, const GridSpec& outer, std::size_t row0,
                   std::size_t col0) {
    if (row0 + inner.spec.n_rows > outer.n_rows ||
        col0 + inner.spec.m_cols > outer.m_cols)
        throw config_error("embed_window: window exceeds field");
    Image out(outer, 0.0);
    for (std::size_t i = 0; i < inner.spec.n_rows; ++i)
        for (std::size_t j = 0; j < inner.spec.m_cols; ++j)
            out.at(row0 + i, col0 + j) = inner.at(i, j);
    return out;
}

Image resample_bilinear(const Image& field, const GridSpec& target) {
    target.validate();
    if (target.n_rows == field.spec.n_rows && target.m_cols == field.spec.m_cols) {
        Image out = field;
        out.spec = target;
        return out;
    }

    const std::size_t sn = field.spec.n_rows, sm = field.spec.m_cols;
    Image out(target);
    auto src_pos = [](std::size_t i, std::size_t n_tgt, std::size_t n_src) {
        if (n_tgt == 1) return (static_cast<double>(n_src) - 1.0) / 2.0;
        return static_cast<double>(i) * (static_cast<double>(n_src) - 1.0) /
               (static_cast<double>(n_tgt) - 1.0);
    };
    for (std::size_t i = 0; i < target.n_rows; ++i) {
        const double y = src_pos(i, target.n_rows, sn);
        const std::size_t y0 = std::min(static_cast<std::size_t>(y), sn - 1);
        const std::size_t y1 = std::min(y0 + 1, sn - 1);
        const double wy = y - static_cast<double>(y0);
        for (std::size_t j = 0; j < target.m_cols; ++j) {
            const double x = src_pos(j, target.m_cols, sm);
            const std::size_t x0 = std::min(static_cast<std::size_t>(x), sm - 1);
            const std::size_t x1 = std::min(x0 + 1, sm - 1);
            const double wx = x - static_cast<double>(x0);
            out.at(i, j) = (1.0 - wy) * ((1.0 - wx) * field.at(y0, x0) + wx * field.at(y0, x1)) +
                           wy * ((1.0 - wx) * field.at(y1, x0) + wx * field.at(y1, x1));
        }
    }
    return out;
}

}  // namespace srm::grid
