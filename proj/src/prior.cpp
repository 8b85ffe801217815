#include "srm/prior.hpp"

#include <algorithm>
#include <cmath>

#include "srm/grid.hpp"

namespace srm::prior {

LatentVector& LatentVector::operator+=(const LatentVector& o) {
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] += o.xi[i];
    a_lat += o.a_lat;
    b_lat += o.b_lat;
    c_lat += o.c_lat;
    s_lat += o.s_lat;
    return *this;
}

LatentVector& LatentVector::operator-=(const LatentVector& o) {
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] -= o.xi[i];
    a_lat -= o.a_lat;
    b_lat -= o.b_lat;
    c_lat -= o.c_lat;
    s_lat -= o.s_lat;
    return *this;
}

LatentVector& LatentVector::operator*=(double f) {
    for (double& x : xi) x *= f;
    a_lat *= f;
    b_lat *= f;
    c_lat *= f;
    s_lat *= f;
    return *this;
}

LatentVector LatentVector::operator-() const {
    LatentVector out = *this;
    out *= -1.0;
    return out;
}

LatentVector operator+(LatentVector a, const LatentVector& b) { return a += b; }
LatentVector operator-(LatentVector a, const LatentVector& b) { return a -= b; }
LatentVector operator*(double f, LatentVector a) { return a *= f; }

double dot(const LatentVector& a, const LatentVector& b) {
    double s = srm::dot(a.xi, b.xi);
    s += a.a_lat * b.a_lat + a.b_lat * b.b_lat + a.c_lat * b.c_lat + a.s_lat * b.s_lat;
    return s;
}

double norm(const LatentVector& v) { return std::sqrt(dot(v, v)); }

void axpy(double f, const LatentVector& x, LatentVector& y) {
    for (std::size_t i = 0; i < x.xi.size(); ++i) y.xi[i] += f * x.xi[i];
    y.a_lat += f * x.a_lat;
    y.b_lat += f * x.b_lat;
    y.c_lat += f * x.c_lat;
    y.s_lat += f * x.s_lat;
}

LatentVector random_latent(std::size_t field_size, Rng& rng) {
    LatentVector lat(field_size);
    for (double& x : lat.xi) x = rng.normal();
    lat.a_lat = rng.normal();
    lat.b_lat = rng.normal();
    lat.c_lat = rng.normal();
    lat.s_lat = rng.normal();
    return lat;
}

PriorConfig PriorConfig::defaults_for(const GridSpec& padded, double scale_r) {
    PriorConfig cfg;
    cfg.padded = padded;
    cfg.scale_r = scale_r;
    cfg.b_log_mean = std::log(0.1 * static_cast<double>(std::min(padded.n_rows, padded.m_cols)));
    cfg.c_log_mean = std::log(4.0);
    return cfg;
}

void PriorConfig::validate() const {
    padded.validate();
    if (!(scale_r > 0.0)) throw config_error("PriorConfig: scale r must be > 0");
    if (!(s_std > 0.0) || !(a_log_std > 0.0) || !(b_log_std > 0.0) || !(c_log_std > 0.0))
        throw config_error("PriorConfig: std hyperparameters must be > 0");
}

double matern_spectrum(double a, double b, double c, long k_row, long k_col) {
    if (!(a > 0.0) || !(b > 0.0) || !(c < 0.0))
        throw config_error("matern_spectrum: need a > 0, b > 0, c < 0");
    const double k2 = static_cast<double>(k_row) * static_cast<double>(k_row) +
                      static_cast<double>(k_col) * static_cast<double>(k_col);
    return a * std::pow(1.0 + k2 / (b * b), 0.25 * c);
}

namespace {

// Overflow guard for line-search probes far outside the prior bulk; exp(40)
// leaves ample dynamic range and keeps every downstream value finite.
inline double safe_exp(double x) { return std::exp(std::clamp(x, -40.0, 40.0)); }

}  // namespace

SpectrumParams latent_to_params(const PriorConfig& cfg, const LatentVector& lat) {
    cfg.validate();
    SpectrumParams p;
    p.a = safe_exp(cfg.a_log_mean + cfg.a_log_std * lat.a_lat);
    p.b = safe_exp(cfg.b_log_mean + cfg.b_log_std * lat.b_lat);
    p.c = -safe_exp(cfg.c_log_mean + cfg.c_log_std * lat.c_lat);
    p.s = cfg.s_mean + cfg.s_std * lat.s_lat;
    return p;
}

namespace {

// Signed wavevector component for FFT storage index i on an axis of size n.
inline double k_signed(std::size_t i, std::size_t n) {
    return i <= n / 2 ? static_cast<double>(i)
                      : static_cast<double>(i) - static_cast<double>(n);
}

// Floored so that saturated fields stay strictly inside (0, 1) in floating
// point; far outside the line-search trust region the exact tails underflow.
inline double sigmoid(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return std::clamp(s, 1e-300, 1.0 - 1e-16);
}

}  // namespace

Image generate_field(const PriorConfig& cfg, const LatentVector& lat) {
    cfg.validate();
    if (lat.xi.size() != cfg.padded.size())
        throw config_error("generate_field: latent field size mismatch");
    const SpectrumParams p = latent_to_params(cfg, lat);
    const std::size_t rows = cfg.padded.n_rows, cols = cfg.padded.m_cols;

    Image amplitudes(cfg.padded);
    const double b2 = p.b * p.b;
    for (std::size_t i = 0; i < rows; ++i) {
        const double kr = k_signed(i, rows);
        for (std::size_t j = 0; j < cols; ++j) {
            const double kc = k_signed(j, cols);
            const double e = p.a * std::pow(1.0 + (kr * kr + kc * kc) / b2, 0.25 * p.c);
            amplitudes.values[i * cols + j] = e * lat.xi[i * cols + j];
        }
    }
    return grid::hartley_transform(amplitudes);
}

Image generate_image(const PriorConfig& cfg, const LatentVector& lat) {
    Image field = generate_field(cfg, lat);
    const double s = cfg.s_mean + cfg.s_std * lat.s_lat;
    for (double& v : field.values) v = cfg.scale_r * sigmoid(v + s);
    return field;
}

Linearization::Linearization(const PriorConfig& cfg, const LatentVector& lat)
    : padded_(cfg.padded), s_std_(cfg.s_std), image_(cfg.padded) {
    cfg.validate();
    if (lat.xi.size() != cfg.padded.size())
        throw config_error("Linearization: latent field size mismatch");
    params_ = latent_to_params(cfg, lat);
    const std::size_t rows = padded_.n_rows, cols = padded_.m_cols;
    const std::size_t n = rows * cols;

    xi_ = lat.xi;
    spectrum_.resize(n);
    d_spec_a_.resize(n);
    d_spec_b_.resize(n);
    d_spec_c_.resize(n);

    const double b2 = params_.b * params_.b;
    const double c4 = 0.25 * params_.c;
    std::vector<double> amplitudes(n);
    for (std::size_t i = 0; i < rows; ++i) {
        const double kr = k_signed(i, rows);
        for (std::size_t j = 0; j < cols; ++j) {
            const double kc = k_signed(j, cols);
            const std::size_t idx = i * cols + j;
            const double k2 = kr * kr + kc * kc;
            const double t = 1.0 + k2 / b2;
            const double e = params_.a * std::pow(t, c4);
            spectrum_[idx] = e;
            const double exi = e * xi_[idx];
            amplitudes[idx] = exi;
            // Chain rule through the lognormal parameter maps:
            //   dE/dpsi_a = E sigma_a
            //   dE/dpsi_b = E (c/4)(-2 k^2/b^2)/t sigma_b
            //   dE/dpsi_c = E (ln t)/4 (c sigma_c)
            d_spec_a_[idx] = exi * cfg.a_log_std;
            d_spec_b_[idx] = exi * c4 * (-2.0 * k2 / b2) / t * cfg.b_log_std;
            d_spec_c_[idx] = exi * 0.25 * std::log(t) * params_.c * cfg.c_log_std;
        }
    }

    std::vector<double> gf;
    grid::hartley_transform(rows, cols, amplitudes, gf);
    chain_w_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sig = sigmoid(gf[i] + params_.s);
        image_.values[i] = cfg.scale_r * sig;
        chain_w_[i] = cfg.scale_r * sig * (1.0 - sig);
    }
}

Image Linearization::jvp(const LatentVector& tangent) const {
    if (tangent.xi.size() != spectrum_.size())
        throw config_error("jvp: tangent dimension mismatch");
    const std::size_t n = spectrum_.size();
    std::vector<double> d_amp(n);
    for (std::size_t i = 0; i < n; ++i) {
        d_amp[i] = spectrum_[i] * tangent.xi[i] + d_spec_a_[i] * tangent.a_lat +
                   d_spec_b_[i] * tangent.b_lat + d_spec_c_[i] * tangent.c_lat;
    }
    std::vector<double> d_gf;
    grid::hartley_transform(padded_.n_rows, padded_.m_cols, d_amp, d_gf);
    Image out(padded_);
    const double ds = s_std_ * tangent.s_lat;
    for (std::size_t i = 0; i < n; ++i) out.values[i] = chain_w_[i] * (d_gf[i] + ds);
    return out;
}

LatentVector Linearization::vjp(const Image& cotangent) const {
    if (cotangent.values.size() != spectrum_.size())
        throw config_error("vjp: cotangent dimension mismatch");
    const std::size_t n = spectrum_.size();
    std::vector<double> g_y(n);
    for (std::size_t i = 0; i < n; ++i) g_y[i] = chain_w_[i] * cotangent.values[i];

    LatentVector out(n);
    out.s_lat = s_std_ * sum(g_y);

    std::vector<double> g_amp;
    grid::hartley_transform(padded_.n_rows, padded_.m_cols, g_y, g_amp);
    for (std::size_t i = 0; i < n; ++i) out.xi[i] = spectrum_[i] * g_amp[i];
    out.a_lat = srm::dot(d_spec_a_, g_amp);
    out.b_lat = srm::dot(d_spec_b_, g_amp);
    out.c_lat = srm::dot(d_spec_c_, g_amp);
    return out;
}

LatentVector Linearization::metric_diag_estimate(const std::vector<double>& filter_power,
                                                 double rho, double sigma) const {
    const std::size_t n = spectrum_.size();
    if (filter_power.size() != n)
        throw config_error("metric_diag_estimate: filter lattice mismatch");

    double mean_w2 = 0.0;
    for (double w : chain_w_) mean_w2 += w * w;
    mean_w2 /= static_cast<double>(n);

    const double inv_var = 1.0 / (sigma * sigma);
    const double gain = rho * mean_w2 * inv_var;

    LatentVector diag(n);
    double acc_a = 0.0, acc_b = 0.0, acc_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fp = filter_power[i];
        diag.xi[i] = 1.0 + gain * fp * spectrum_[i] * spectrum_[i];
        acc_a += fp * d_spec_a_[i] * d_spec_a_[i];
        acc_b += fp * d_spec_b_[i] * d_spec_b_[i];
        acc_c += fp * d_spec_c_[i] * d_spec_c_[i];
    }
    diag.a_lat = 1.0 + gain * acc_a;
    diag.b_lat = 1.0 + gain * acc_b;
    diag.c_lat = 1.0 + gain * acc_c;
    // The offset tangent skips the harmonic map: d(image) = w * s_std.
    diag.s_lat = 1.0 + rho * inv_var * s_std_ * s_std_ * mean_w2 * static_cast<double>(n);
    return diag;
}

Image jvp(const PriorConfig& cfg, const LatentVector& lat, const LatentVector& tangent) {
    return Linearization(cfg, lat).jvp(tangent);
}

LatentVector vjp(const PriorConfig& cfg, const LatentVector& lat, const Image& cotangent) {
    return Linearization(cfg, lat).vjp(cotangent);
}

double choose_scale_r(const std::vector<double>& data, double sigma_v, double kappa) {
    if (data.empty()) throw config_error("choose_scale_r: empty data");
    const double d_max = *std::max_element(data.begin(), data.end());
    const double r = std::max(kappa * std::max(d_max, 0.0), 10.0 * sigma_v);
    if (!(r > 0.0))
        throw config_error("choose_scale_r: all-zero data with non-positive sigma");
    return r;
}

}  // namespace srm::prior
