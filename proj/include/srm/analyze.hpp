#pragma once

#include "srm/forward.hpp"
#include "srm/types.hpp"

namespace srm::analyze {

struct Histogram {
    std::vector<double> edges;   // n_bins + 1
    std::vector<std::size_t> counts;
};

// Per-channel evaluation results; metrics always consume raw values, never
// display-processed ones.
struct ChannelMetrics {
    double wavenumber_cm1 = 0.0;
    double ssim = 0.0;
    double mae = 0.0;
    double max_abs_error = 0.0;
    double mrsd = -1.0;  // < 0 when no uncertainty image was supplied
    Image error_map;
    Histogram rsd_histogram;
};

struct MetricsReport {
    std::vector<ChannelMetrics> channels;
    double mean_ssim = 0.0;
    double mean_mae = 0.0;
};

struct EndmemberSet {
    std::vector<std::string> names;
    std::vector<std::vector<double>> spectra;  // per endmember, over channels

    void validate() const;
};

// Global single-window SSIM with stabilizers c1 = 1e-4, c2 = 9e-4 acting on
// jointly min-max normalized inputs.
double ssim(const Image& rc, const Image& gt);

// Mean over pixels of posterior std / posterior mean.
double mrsd(const Image& mean_img, const Image& std_img);

Image error_map(const Image& rc, const Image& gt);
double mae(const Image& rc, const Image& gt);

// Mean relative error over channels; zero-valued ground-truth channels are
// excluded and counted.
double mre_spectrum(const std::vector<double>& rc_spectrum,
                    const std::vector<double>& gt_spectrum,
                    std::size_t* excluded_channels = nullptr);

Histogram rsd_histogram(const Image& mean_img, const Image& std_img,
                        std::size_t n_bins = 50);

// Adjoint scatter of the sparse data onto the full grid; skipped lines stay
// zero.
Image backprojection_display(const forward::SparseScan& scan);

// Contrast-limited adaptive histogram equalization on the min-max normalized
// image. Display only; the metrics pipeline never sees its output.
Image clahe(const Image& img, std::size_t tiles = 8, double clip_limit = 2.0);

struct UnmixResult {
    std::vector<double> coefficients;
    bool degenerate = false;  // rank-deficient endmember matrix
};

// Non-negative least squares fit of the endmember spectra to one pixel
// spectrum (active-set method, KKT-checked).
UnmixResult unmix_pixel(const std::vector<double>& spectrum, const EndmemberSet& endmembers);

struct CubeUnmixResult {
    std::vector<Image> coefficient_maps;   // per endmember
    std::vector<double> composition;       // fractions, sum to 1
    std::size_t degenerate_pixels = 0;
};

CubeUnmixResult unmix_cube(const HyperCube& cube, const EndmemberSet& endmembers);

}  // namespace srm::analyze
