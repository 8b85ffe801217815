#pragma once

#include "srm/types.hpp"

namespace srm::forward {

// System PSF width characterized on a sub-resolution sphere.
inline constexpr double kDefaultPsfSigmaUm = 5.0;

// Which rows a sparse raster scan visits: every stride_w-th line, plus how
// many laser pulses are averaged per pixel relative to a full scan.
struct ScanPattern {
    GridSpec full_spec;
    std::size_t stride_w = 1;
    std::size_t pulses_per_pixel = 15;
    std::size_t pulses_full = 50;

    void validate() const;

    std::size_t n_measured_lines() const {
        return (full_spec.n_rows + stride_w - 1) / stride_w;
    }
    std::size_t n_data() const { return n_measured_lines() * full_spec.m_cols; }

    // 1-based row indices {1, w+1, 2w+1, ...}, derived, never hand-set.
    std::vector<std::size_t> measured_lines() const;
};

struct NoiseModel {
    double sigma_v = 9.318e-7;  // dark-noise std per averaged datum

    void validate() const {
        if (!(sigma_v > 0.0)) throw config_error("NoiseModel: sigma must be > 0");
    }
};

// One sparsely acquired channel: measured peak-to-peak values in scan order
// (line-major, then column).
struct SparseScan {
    ScanPattern pattern;
    NoiseModel noise;
    double wavenumber_cm1 = 0.0;
    std::vector<double> data;

    void validate() const;
};

// Overall sparsity = 1 - (measured lines / rows) * (pulses / full pulses).
double sparsity_fraction(const ScanPattern& pattern);

// R_stages: copy pixel values on measured lines into the data vector.
std::vector<double> apply_stages(const Image& blurred, const ScanPattern& pattern);

// Exact adjoint: scatter data back onto measured lines, zeros elsewhere.
Image apply_stages_adjoint(const std::vector<double>& data, const ScanPattern& pattern);

// R = R_stages o R_PSF with reflective boundary handling around the
// periodic harmonic-domain convolution.
std::vector<double> forward_apply(const Image& image, const ScanPattern& pattern,
                                  double psf_sigma_um = kDefaultPsfSigmaUm);

// Exact adjoint of forward_apply (fold the reflect padding back).
Image forward_adjoint(const std::vector<double>& data, const ScanPattern& pattern,
                      double psf_sigma_um = kDefaultPsfSigmaUm);

// Gaussian log-likelihood log p(d|i) = -|d - R(i)|^2 / (2 sigma^2) + const.
double log_likelihood(const SparseScan& scan, const Image& image,
                      double psf_sigma_um = kDefaultPsfSigmaUm);

}  // namespace srm::forward
