#include "srm/forward.hpp"

#include <cmath>

#include "srm/grid.hpp"

namespace srm::forward {

void ScanPattern::validate() const {
    full_spec.validate();
    if (stride_w < 1) throw config_error("ScanPattern: stride must be >= 1");
    if (pulses_per_pixel < 1 || pulses_per_pixel > pulses_full)
        throw config_error("ScanPattern: need 1 <= pulses_per_pixel <= pulses_full");
}

std::vector<std::size_t> ScanPattern::measured_lines() const {
    std::vector<std::size_t> lines;
    lines.reserve(n_measured_lines());
    for (std::size_t r = 0; r < full_spec.n_rows; r += stride_w)
        lines.push_back(r + 1);
    return lines;
}

void SparseScan::validate() const {
    pattern.validate();
    noise.validate();
    if (data.size() != pattern.n_data())
        throw config_error("SparseScan: data length does not match pattern");
    if (!all_finite(data)) throw numerical_error("SparseScan: non-finite data");
}

double sparsity_fraction(const ScanPattern& pattern) {
    pattern.validate();
    const double line_frac = static_cast<double>(pattern.n_measured_lines()) /
                             static_cast<double>(pattern.full_spec.n_rows);
    const double pulse_frac = static_cast<double>(pattern.pulses_per_pixel) /
                              static_cast<double>(pattern.pulses_full);
    return 1.0 - line_frac * pulse_frac;
}

std::vector<double> apply_stages(const Image& blurred, const ScanPattern& pattern) {
    if (!blurred.spec.compatible(pattern.full_spec))
        throw config_error("apply_stages: grid mismatch");
    const std::size_t m = pattern.full_spec.m_cols;
    std::vector<double> data;
    data.reserve(pattern.n_data());
    for (std::size_t r = 0; r < pattern.full_spec.n_rows; r += pattern.stride_w)
        for (std::size_t c = 0; c < m; ++c) data.push_back(blurred.at(r, c));
    return data;
}

Image apply_stages_adjoint(const std::vector<double>& data, const ScanPattern& pattern) {
    if (data.size() != pattern.n_data())
        throw config_error("apply_stages_adjoint: data length mismatch");
    Image out(pattern.full_spec, 0.0);
    const std::size_t m = pattern.full_spec.m_cols;
    std::size_t k = 0;
    for (std::size_t r = 0; r < pattern.full_spec.n_rows; r += pattern.stride_w)
        for (std::size_t c = 0; c < m; ++c) out.at(r, c) = data[k++];
    return out;
}

std::vector<double> forward_apply(const Image& image, const ScanPattern& pattern,
                                  double psf_sigma_um) {
    if (!image.spec.compatible(pattern.full_spec))
        throw config_error("forward_apply: grid mismatch");
    const double sigma_px = psf_sigma_um / image.spec.pixel_size_um;
    if (sigma_px < grid::kMinSigmaPx) return apply_stages(image, pattern);

    const std::size_t mr = grid::conv_margin(image.spec.n_rows, sigma_px);
    const std::size_t mc = grid::conv_margin(image.spec.m_cols, sigma_px);
    Image padded = grid::pad_reflect(image, mr, mc);
    Image blurred = grid::convolve_gaussian(padded, psf_sigma_um);
    return apply_stages(grid::crop(blurred, mr, mc), pattern);
}

Image forward_adjoint(const std::vector<double>& data, const ScanPattern& pattern,
                      double psf_sigma_um) {
    const double sigma_px = psf_sigma_um / pattern.full_spec.pixel_size_um;
    Image scattered = apply_stages_adjoint(data, pattern);
    if (sigma_px < grid::kMinSigmaPx) return scattered;

    const std::size_t mr = grid::conv_margin(pattern.full_spec.n_rows, sigma_px);
    const std::size_t mc = grid::conv_margin(pattern.full_spec.m_cols, sigma_px);
    GridSpec padded_spec{pattern.full_spec.n_rows + 2 * mr,
                         pattern.full_spec.m_cols + 2 * mc,
                         pattern.full_spec.pixel_size_um};
    Image embedded = grid::embed_window(scattered, padded_spec, mr, mc);
    Image blurred = grid::convolve_gaussian(embedded, psf_sigma_um);
    return grid::pad_reflect_adjoint(blurred, mr, mc);
}

double log_likelihood(const SparseScan& scan, const Image& image, double psf_sigma_um) {
    scan.validate();
    const std::vector<double> model = forward_apply(image, scan.pattern, psf_sigma_um);
    const double sigma = scan.noise.sigma_v;
    double quad = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double r = scan.data[i] - model[i];
        quad += r * r;
    }
    const double two_pi = 6.28318530717958647692;
    return -0.5 * quad / (sigma * sigma) -
           0.5 * static_cast<double>(model.size()) * std::log(two_pi * sigma * sigma);
}

}  // namespace srm::forward
