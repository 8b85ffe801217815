#include "srm/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "srm/grid.hpp"

namespace srm::simulate {

PhantomKind phantom_kind_from_string(const std::string& name) {
    if (name == "grain") return PhantomKind::grain;
    if (name == "cells") return PhantomKind::cells;
    if (name == "prior-draw") return PhantomKind::prior_draw;
    throw config_error("unknown phantom kind: " + name);
}

std::string to_string(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::grain: return "grain";
        case PhantomKind::cells: return "cells";
        case PhantomKind::prior_draw: return "prior-draw";
    }
    return "?";
}

namespace {

// Carbon-tape-like granules: clamped soft threshold of smoothed white noise.
// The kernel width is calibrated so the clamped field's autocorrelation 1/e
// crossing lands on the requested correlation length.
Image grain_truth(const GridSpec& spec, Rng& rng, const PhantomParams& p) {
    const double length_px = p.correlation_length_um / spec.pixel_size_um;
    const double kernel_sigma_px = 0.55 * length_px;

    Image noise(spec);
    for (double& v : noise.values) v = rng.normal();
    Image smooth = grid::convolve_gaussian(noise, kernel_sigma_px * spec.pixel_size_um);

    double m1 = 0.0, m2 = 0.0;
    for (double v : smooth.values) {
        m1 += v;
        m2 += v * v;
    }
    m1 /= static_cast<double>(smooth.values.size());
    const double std = std::sqrt(std::max(m2 / static_cast<double>(smooth.values.size()) - m1 * m1, 1e-300));

    // Quantile threshold sets the bright-grain coverage.
    std::vector<double> sorted = smooth.values;
    std::sort(sorted.begin(), sorted.end());
    const double tau =
        sorted[static_cast<std::size_t>((1.0 - p.grain_coverage) * (sorted.size() - 1))];
    const double hi = tau + 1.6 * std;

    Image out(spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double z = (smooth.values[i] - tau) / (hi - tau);
        out.values[i] = p.peak_v * std::clamp(z, 0.0, 1.0);
    }
    return out;
}

struct Disc {
    double row, col, radius;
};

std::vector<Disc> pack_discs(const GridSpec& spec, Rng& rng, const PhantomParams& p) {
    const double r_min = p.cell_radius_min_um / spec.pixel_size_um;
    const double r_max = p.cell_radius_max_um / spec.pixel_size_um;
    const double gap = p.rim_gap_um / spec.pixel_size_um;
    if (!(r_min > 0.0) || r_max < r_min)
        throw config_error("cells phantom: invalid radius range");

    const double n = static_cast<double>(spec.n_rows);
    const double m = static_cast<double>(spec.m_cols);
    const double mean_area = 3.14159265358979323846 * 0.25 * (r_min + r_max) * (r_min + r_max);
    const std::size_t target = std::min<std::size_t>(
        p.max_cells, static_cast<std::size_t>(1.2 * n * m / mean_area) + 1);

    std::vector<Disc> discs;
    std::size_t failures = 0;
    const std::size_t max_failures = 400 * (target + 1);
    while (discs.size() < target && failures < max_failures) {
        Disc d;
        d.radius = r_min + (r_max - r_min) * rng.uniform();
        d.row = -r_max + (n + 2.0 * r_max) * rng.uniform();
        d.col = -r_max + (m + 2.0 * r_max) * rng.uniform();
        bool ok = true;
        for (const Disc& other : discs) {
            const double dr = d.row - other.row, dc = d.col - other.col;
            const double min_dist = d.radius + other.radius + gap;
            if (dr * dr + dc * dc < min_dist * min_dist) {
                ok = false;
                break;
            }
        }
        if (ok)
            discs.push_back(d);
        else
            ++failures;
    }
    return discs;
}

// Signed distance to the nearest cell boundary, clipped to the render reach.
std::vector<double> boundary_distance(const GridSpec& spec, const std::vector<Disc>& discs,
                                      double reach) {
    const double far = 1e30;
    std::vector<double> dist(spec.size(), far);
    const long n = static_cast<long>(spec.n_rows), m = static_cast<long>(spec.m_cols);
    for (const Disc& d : discs) {
        const double extent = d.radius + reach;
        const long r0 = std::max(0L, static_cast<long>(std::floor(d.row - extent)));
        const long r1 = std::min(n - 1, static_cast<long>(std::ceil(d.row + extent)));
        const long c0 = std::max(0L, static_cast<long>(std::floor(d.col - extent)));
        const long c1 = std::min(m - 1, static_cast<long>(std::ceil(d.col + extent)));
        for (long r = r0; r <= r1; ++r) {
            for (long c = c0; c <= c1; ++c) {
                const double dr = static_cast<double>(r) - d.row;
                const double dc = static_cast<double>(c) - d.col;
                const double s = std::sqrt(dr * dr + dc * dc) - d.radius;
                double& cur = dist[static_cast<std::size_t>(r) * spec.m_cols +
                                   static_cast<std::size_t>(c)];
                if (std::abs(s) < std::abs(cur)) cur = s;
            }
        }
    }
    return dist;
}

// Adipocyte-like texture: dark interiors, bright smooth rims, moderate
// background between cells.
Image cells_truth(const GridSpec& spec, Rng& rng, const PhantomParams& p) {
    const std::vector<Disc> discs = pack_discs(spec, rng, p);
    const double rim_sigma = p.rim_width_um / spec.pixel_size_um;
    const std::vector<double> dist = boundary_distance(spec, discs, 4.0 * rim_sigma);

    Image out(spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double d = dist[i];
        const double base = d < 0.0 ? p.interior_level : p.background_level;
        const double rim = std::abs(d) < 6.0 * rim_sigma
                               ? std::exp(-0.5 * d * d / (rim_sigma * rim_sigma))
                               : 0.0;
        out.values[i] = p.peak_v * (base + (1.0 - base) * rim);
    }
    return out;
}

Image prior_draw_truth(const GridSpec& spec, Rng& rng, const PhantomParams& p) {
    prior::PriorConfig cfg = prior::PriorConfig::defaults_for(spec, p.peak_v);
    cfg.a_log_mean = std::log(p.draw_spectrum_a);
    cfg.b_log_mean =
        std::log(p.draw_spectrum_b_frac * static_cast<double>(std::min(spec.n_rows, spec.m_cols)));
    cfg.c_log_mean = std::log(-p.draw_spectrum_c);

    prior::LatentVector lat(spec.size());
    if (!p.draw_zero_latent)
        for (double& x : lat.xi) x = rng.normal();
    return prior::generate_image(cfg, lat);
}

}  // namespace

Phantom make_phantom(PhantomKind kind, const GridSpec& spec, Rng& rng,
                     const PhantomParams& params) {
    spec.validate();
    if (!(params.peak_v > 0.0)) throw config_error("phantom: peak amplitude must be > 0");
    Phantom ph;
    ph.kind = kind;
    ph.truth.spec = spec;
    ph.truth.wavenumbers_cm1 = {0.0};
    switch (kind) {
        case PhantomKind::grain:
            ph.truth.channels = {grain_truth(spec, rng, params)};
            break;
        case PhantomKind::cells:
            ph.truth.channels = {cells_truth(spec, rng, params)};
            break;
        case PhantomKind::prior_draw:
            ph.truth.channels = {prior_draw_truth(spec, rng, params)};
            break;
    }
    return ph;
}

Phantom make_spectral_phantom(const GridSpec& spec, Rng& rng,
                              const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& spectra,
                              const std::vector<double>& wavenumbers_cm1,
                              const PhantomParams& params) {
    spec.validate();
    if (names.size() != 2 || spectra.size() != 2)
        throw config_error("spectral phantom: exactly two endmembers expected");
    for (const auto& s : spectra)
        if (s.size() != wavenumbers_cm1.size())
            throw config_error("spectral phantom: spectrum length mismatch");

    // Interior weight carries the first endmember, rim + background the second.
    PhantomParams cell_params = params;
    cell_params.peak_v = 1.0;
    const std::vector<Disc> discs = pack_discs(spec, rng, cell_params);
    const double rim_sigma = params.rim_width_um / spec.pixel_size_um;
    const std::vector<double> dist = boundary_distance(spec, discs, 4.0 * rim_sigma);

    Image w_first(spec), w_second(spec);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const double d = dist[i];
        const double rim = std::abs(d) < 6.0 * rim_sigma
                               ? std::exp(-0.5 * d * d / (rim_sigma * rim_sigma))
                               : 0.0;
        const double interior = d < 0.0 ? 1.0 - rim : 0.0;
        const double matrix = d >= 0.0 ? params.background_level + (1.0 - params.background_level) * rim
                                       : rim;
        w_first.values[i] = interior;
        w_second.values[i] = matrix;
    }

    Phantom ph;
    ph.kind = PhantomKind::cells;
    ph.endmember_names = names;
    ph.endmember_spectra = spectra;
    ph.weight_maps = {w_first, w_second};
    ph.truth.spec = spec;
    ph.truth.wavenumbers_cm1 = wavenumbers_cm1;
    ph.truth.channels.reserve(wavenumbers_cm1.size());
    for (std::size_t ch = 0; ch < wavenumbers_cm1.size(); ++ch) {
        Image channel(spec);
        for (std::size_t i = 0; i < channel.values.size(); ++i)
            channel.values[i] = params.peak_v * (w_first.values[i] * spectra[0][ch] +
                                                 w_second.values[i] * spectra[1][ch]);
        ph.truth.channels.push_back(std::move(channel));
    }
    ph.truth.validate();
    return ph;
}

double peak_to_peak(const std::vector<double>& transient) {
    if (transient.empty()) throw config_error("peak_to_peak: empty transient");
    const auto [lo, hi] = std::minmax_element(transient.begin(), transient.end());
    return *hi - *lo;
}

forward::SparseScan acquire(const Image& truth, const forward::ScanPattern& pattern,
                            const forward::NoiseModel& noise, double psf_sigma_um,
                            Rng* rng, double wavenumber_cm1) {
    pattern.validate();
    noise.validate();
    forward::SparseScan scan;
    scan.pattern = pattern;
    scan.wavenumber_cm1 = wavenumber_cm1;
    const double pulse_scale = std::sqrt(static_cast<double>(pattern.pulses_full) /
                                         static_cast<double>(pattern.pulses_per_pixel));
    scan.noise.sigma_v = noise.sigma_v * pulse_scale;
    scan.data = forward::forward_apply(truth, pattern, psf_sigma_um);
    if (rng != nullptr)
        for (double& d : scan.data) d += scan.noise.sigma_v * rng->normal();
    return scan;
}

TimingModel TimingModel::paper_calibrated() {
    // Two reference timings of the 400-line 2x2 mm carbon scan: full raster
    // (50 pulses/px) took 23.43 min, the stride-4 scan at 15 pulses/px took
    // 2.15 min. Fitting (v_max, overhead) alone cannot separate the two
    // per-line times, so the effective pixel rate absorbs the per-pulse DAQ
    // and settling cost.
    const double per_line_full = 23.43 * 60.0 / 400.0;
    const double per_line_sparse = 2.15 * 60.0 / 100.0;
    const double m_cols = 400.0, pulses_full = 50.0, pulses_sparse = 15.0;

    TimingModel tm;
    tm.rep_rate_hz = m_cols * (pulses_full - pulses_sparse) / (per_line_full - per_line_sparse);
    tm.line_overhead_s = per_line_full - m_cols * pulses_full / tm.rep_rate_hz;
    tm.v_max_um_s = 1e9;
    return tm;
}

double acquisition_time_s(const forward::ScanPattern& pattern, const TimingModel& tm) {
    pattern.validate();
    if (!(tm.rep_rate_hz > 0.0) || !(tm.v_max_um_s > 0.0) || tm.line_overhead_s < 0.0)
        throw config_error("acquisition_time: invalid timing model");
    const double m = static_cast<double>(pattern.full_spec.m_cols);
    const double dwell = m * static_cast<double>(pattern.pulses_per_pixel) / tm.rep_rate_hz;
    const double stage = m * pattern.full_spec.pixel_size_um / tm.v_max_um_s;
    return static_cast<double>(pattern.n_measured_lines()) *
           (std::max(dwell, stage) + tm.line_overhead_s);
}

double speedup(double t_full_s, double t_sparse_s) {
    if (!(t_sparse_s > 0.0)) throw config_error("speedup: sparse time must be > 0");
    return t_full_s / t_sparse_s;
}

double correlation_length_px(const Image& field) {
    const std::size_t n = field.spec.n_rows, m = field.spec.m_cols;
    const double mean = sum(field.values) / static_cast<double>(field.values.size());
    const std::size_t max_lag = std::min<std::size_t>(m - 1, m / 2);

    std::vector<double> corr(max_lag + 1, 0.0);
    std::vector<std::size_t> counts(max_lag + 1, 0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t lag = 0; lag <= max_lag; ++lag) {
            for (std::size_t c = 0; c + lag < m; ++c) {
                corr[lag] += (field.at(r, c) - mean) * (field.at(r, c + lag) - mean);
                ++counts[lag];
            }
        }
    }
    for (std::size_t lag = 0; lag <= max_lag; ++lag)
        corr[lag] /= static_cast<double>(counts[lag]);
    if (!(corr[0] > 0.0)) throw numerical_error("correlation_length: constant field");

    const double target = std::exp(-1.0);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        const double rho = corr[lag] / corr[0];
        if (rho < target) {
            const double prev = corr[lag - 1] / corr[0];
            const double t = (prev - target) / (prev - rho);
            return static_cast<double>(lag - 1) + t;
        }
    }
    return static_cast<double>(max_lag);
}

}  // namespace srm::simulate
