#pragma once

#include "srm/rng.hpp"
#include "srm/types.hpp"

namespace srm::prior {

// Standard-normal latent parameters of the generative image model: a field
// on the padded grid plus four scalars steering the spectrum and the offset.
struct LatentVector {
    std::vector<double> xi;
    double a_lat = 0.0;
    double b_lat = 0.0;
    double c_lat = 0.0;
    double s_lat = 0.0;

    LatentVector() = default;
    explicit LatentVector(std::size_t field_size) : xi(field_size, 0.0) {}

    std::size_t dim() const { return xi.size() + 4; }

    LatentVector& operator+=(const LatentVector& o);
    LatentVector& operator-=(const LatentVector& o);
    LatentVector& operator*=(double f);
    LatentVector operator-() const;
};

LatentVector operator+(LatentVector a, const LatentVector& b);
LatentVector operator-(LatentVector a, const LatentVector& b);
LatentVector operator*(double f, LatentVector a);
double dot(const LatentVector& a, const LatentVector& b);
double norm(const LatentVector& v);
// y += f * x
void axpy(double f, const LatentVector& x, LatentVector& y);
LatentVector random_latent(std::size_t field_size, Rng& rng);

// Hyperparameters of the latent-to-parameter maps and the field scale.
// a and b are lognormal, c is a negated lognormal (the spectrum must decay),
// s is Gaussian around 0.5.
struct PriorConfig {
    GridSpec padded;
    double scale_r = 0.1;  // maximal obtainable image value, V
    double s_mean = 0.5;
    double s_std = 0.25;
    double a_log_mean = 0.0;
    double a_log_std = 1.0;
    double b_log_mean = 0.0;
    double b_log_std = 0.75;
    double c_log_mean = 0.0;
    double c_log_std = 0.5;

    // Wide sign-correct defaults; b's prior median is a tenth of the grid
    // extent, c's is -4.
    static PriorConfig defaults_for(const GridSpec& padded, double scale_r);

    void validate() const;
};

struct SpectrumParams {
    double a, b, c, s;
};

// a (1 + (|k|/b)^2)^(c/4) on the centered integer wavevector lattice.
double matern_spectrum(double a, double b, double c, long k_row, long k_col);

SpectrumParams latent_to_params(const PriorConfig& cfg, const LatentVector& lat);

// GF = HT(E . xi)
Image generate_field(const PriorConfig& cfg, const LatentVector& lat);

// f(psi) = r sigmoid(GF + s), strictly inside (0, r)
Image generate_image(const PriorConfig& cfg, const LatentVector& lat);

// Linearization of generate_image at a latent point. Caches the spectrum
// and sigmoid lattices so repeated jvp/vjp calls (CG inner loops) cost one
// transform each.
class Linearization {
public:
    Linearization(const PriorConfig& cfg, const LatentVector& lat);

    const Image& image() const { return image_; }
    const SpectrumParams& params() const { return params_; }

    Image jvp(const LatentVector& tangent) const;
    LatentVector vjp(const Image& cotangent) const;

    // Estimated diagonal of J^T diag(filter_power) J / sigma^2 + 1 for the
    // measurement chain behind this linearization: per-coordinate curvature
    // of the Gauss-Newton metric, used as a CG preconditioner. filter_power
    // holds the squared harmonic response of the blur on the padded lattice;
    // rho is the fraction of padded pixels that reach the data.
    LatentVector metric_diag_estimate(const std::vector<double>& filter_power, double rho,
                                      double sigma) const;

private:
    GridSpec padded_;
    SpectrumParams params_;
    double s_std_;
    std::vector<double> spectrum_;   // E
    std::vector<double> d_spec_a_;   // dE/dpsi_a * xi
    std::vector<double> d_spec_b_;   // dE/dpsi_b * xi
    std::vector<double> d_spec_c_;   // dE/dpsi_c * xi
    std::vector<double> xi_;
    std::vector<double> chain_w_;    // r sig (1 - sig)
    Image image_;
};

Image jvp(const PriorConfig& cfg, const LatentVector& lat, const LatentVector& tangent);
LatentVector vjp(const PriorConfig& cfg, const LatentVector& lat, const Image& cotangent);

// r = kappa * max(d), floored at ten noise sigmas.
double choose_scale_r(const std::vector<double>& data, double sigma_v,
                      double kappa = 1.5);

}  // namespace srm::prior
