#pragma once

#include "srm/forward.hpp"
#include "srm/prior.hpp"
#include "srm/rng.hpp"
#include "srm/types.hpp"

namespace srm::simulate {

enum class PhantomKind { grain, cells, prior_draw };

PhantomKind phantom_kind_from_string(const std::string& name);
std::string to_string(PhantomKind kind);

// Synthetic optoacoustic signal-strength field, single- or multi-channel.
// Hyperspectral phantoms are non-negative mixtures of endmember spectra;
// the per-endmember weight maps are kept for unmixing ground truth.
struct Phantom {
    PhantomKind kind = PhantomKind::cells;
    HyperCube truth;
    std::vector<std::string> endmember_names;
    std::vector<std::vector<double>> endmember_spectra;  // per endmember, over channels
    std::vector<Image> weight_maps;                      // per endmember
};

struct PhantomParams {
    double peak_v = 0.1;
    // grain
    double correlation_length_um = 40.0;
    double grain_coverage = 0.5;
    // cells
    double cell_radius_min_um = 30.0;
    double cell_radius_max_um = 55.0;
    double rim_width_um = 10.0;
    double rim_gap_um = 12.0;
    double interior_level = 0.12;
    double background_level = 0.30;
    std::size_t max_cells = 100000;
    // prior draw
    double draw_spectrum_a = 1.0;
    double draw_spectrum_b_frac = 0.08;  // of min grid extent
    double draw_spectrum_c = -3.5;
    bool draw_zero_latent = false;
};

Phantom make_phantom(PhantomKind kind, const GridSpec& spec, Rng& rng,
                     const PhantomParams& params = {});

// Two-endmember hyperspectral phantom: cells-interior weights carry the
// first spectrum, rim/background weights the second.
Phantom make_spectral_phantom(const GridSpec& spec, Rng& rng,
                              const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& spectra,
                              const std::vector<double>& wavenumbers_cm1,
                              const PhantomParams& params = {});

// max_t - min_t of one averaged transient.
double peak_to_peak(const std::vector<double>& transient);

// Simulated sparse acquisition of one channel: d = R(truth) + noise, with the
// noise std scaled as sigma_ref sqrt(pulses_full / pulses) for reduced
// averaging. Deterministic under the rng seed.
forward::SparseScan acquire(const Image& truth, const forward::ScanPattern& pattern,
                            const forward::NoiseModel& noise,
                            double psf_sigma_um = forward::kDefaultPsfSigmaUm,
                            Rng* rng = nullptr, double wavenumber_cm1 = 0.0);

// Per-line acquisition time model: dwell- or stage-speed-limited, plus a
// fixed per-line overhead.
struct TimingModel {
    double rep_rate_hz = 1e5;
    double line_overhead_s = 0.0;
    double v_max_um_s = 1e9;

    // Calibrated against the published 23.43 min full / 2.15 min sparse
    // timings of the 400-line, 2x2 mm carbon scan. The effective pixel rate
    // absorbs the DAQ and stage-settling overhead per pulse.
    static TimingModel paper_calibrated();
};

double acquisition_time_s(const forward::ScanPattern& pattern, const TimingModel& tm);
double speedup(double t_full_s, double t_sparse_s);

// Autocorrelation 1/e crossing along rows, in pixels; the grain phantom's
// correlation-length contract is verified with this estimate.
double correlation_length_px(const Image& field);

}  // namespace srm::simulate
