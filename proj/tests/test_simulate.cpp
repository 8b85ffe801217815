#include <doctest.h>

#include <cmath>

#include "srm/simulate.hpp"

using namespace srm;
using simulate::PhantomKind;
using simulate::PhantomParams;
using simulate::TimingModel;

TEST_CASE("peak_to_peak") {
    CHECK(simulate::peak_to_peak({0.2, -0.3, 0.1}) == doctest::Approx(0.5));
    CHECK(simulate::peak_to_peak({1.0, 1.0, 1.0}) == 0.0);
    CHECK(simulate::peak_to_peak({0.7}) == 0.0);
    CHECK_THROWS_AS(simulate::peak_to_peak({}), config_error);
}

TEST_CASE("acquire without an rng reproduces the forward model exactly") {
    GridSpec spec{16, 16, 5.0};
    Image truth(spec, 0.0);
    truth.at(8, 8) = 0.1;
    forward::ScanPattern pattern{spec, 2, 15, 50};
    const forward::SparseScan scan =
        simulate::acquire(truth, pattern, forward::NoiseModel{9.318e-7}, 5.0, nullptr);
    CHECK(scan.data == forward::forward_apply(truth, pattern));
}

TEST_CASE("acquire scales the noise std with the pulse count") {
    GridSpec spec{4, 4, 5.0};
    Image truth(spec, 0.05);
    forward::NoiseModel ref{2e-6};
    const auto sigma_of = [&](std::size_t pulses) {
        forward::ScanPattern pattern{spec, 1, pulses, 48};
        return simulate::acquire(truth, pattern, ref, 5.0, nullptr).noise.sigma_v;
    };
    CHECK(sigma_of(48) == doctest::Approx(2e-6));
    CHECK(sigma_of(12) == doctest::Approx(4e-6));  // quarter averaging doubles sigma
}

TEST_CASE("acquire is bit-reproducible under a fixed seed") {
    GridSpec spec{12, 12, 5.0};
    Rng noise_rng(60);
    Image truth(spec);
    for (double& v : truth.values) v = 0.05 + 0.01 * noise_rng.normal();
    forward::ScanPattern pattern{spec, 4, 15, 50};

    Rng rng_a(61), rng_b(61);
    const auto a = simulate::acquire(truth, pattern, {9.318e-7}, 5.0, &rng_a);
    const auto b = simulate::acquire(truth, pattern, {9.318e-7}, 5.0, &rng_b);
    CHECK(a.data == b.data);
}

TEST_CASE("acquired noise is unbiased with the advertised std") {
    GridSpec spec{100, 100, 5.0};
    Image truth(spec, 0.05);
    forward::ScanPattern pattern{spec, 1, 15, 50};
    Rng rng(62);
    const forward::SparseScan scan = simulate::acquire(truth, pattern, {9.318e-7}, 5.0, &rng);
    const std::vector<double> clean = forward::forward_apply(truth, pattern);

    double m1 = 0.0, m2 = 0.0;
    const auto n = static_cast<double>(scan.data.size());
    for (std::size_t i = 0; i < scan.data.size(); ++i) {
        const double r = scan.data[i] - clean[i];
        m1 += r;
        m2 += r * r;
    }
    m1 /= n;
    const double std = std::sqrt(m2 / n - m1 * m1);
    CHECK(std::abs(m1) <= 3.0 * scan.noise.sigma_v / std::sqrt(n));
    CHECK(std == doctest::Approx(scan.noise.sigma_v).epsilon(0.05));
}

TEST_CASE("prior-draw phantom at the zero latent is constant") {
    GridSpec spec{16, 16, 5.0};
    Rng rng(63);
    PhantomParams params;
    params.peak_v = 0.2;
    params.draw_zero_latent = true;
    const auto ph = simulate::make_phantom(PhantomKind::prior_draw, spec, rng, params);
    const double expect = 0.2 / (1.0 + std::exp(-0.5));
    for (double v : ph.truth.channels.front().values)
        CHECK(v == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cells phantom with zero discs is the uniform background") {
    GridSpec spec{32, 32, 5.0};
    Rng rng(64);
    PhantomParams params;
    params.max_cells = 0;
    const auto ph = simulate::make_phantom(PhantomKind::cells, spec, rng, params);
    for (double v : ph.truth.channels.front().values)
        CHECK(v == doctest::Approx(params.peak_v * params.background_level));
}

TEST_CASE("cells phantom stays within [0, peak] and is deterministic") {
    GridSpec spec{64, 64, 5.0};
    Rng rng_a(65), rng_b(65);
    const auto a = simulate::make_phantom(PhantomKind::cells, spec, rng_a);
    const auto b = simulate::make_phantom(PhantomKind::cells, spec, rng_b);
    CHECK(a.truth.channels.front().values == b.truth.channels.front().values);
    for (double v : a.truth.channels.front().values) {
        CHECK(v >= 0.0);
        CHECK(v <= 0.1 + 1e-12);
    }
}

TEST_CASE("grain phantom honors range and correlation length") {
    GridSpec spec{200, 200, 5.0};
    PhantomParams params;
    params.correlation_length_um = 40.0;  // 8 px
    for (std::uint64_t seed : {66u, 67u, 68u}) {
        Rng rng(seed);
        const auto ph = simulate::make_phantom(PhantomKind::grain, spec, rng, params);
        const Image& img = ph.truth.channels.front();
        for (double v : img.values) {
            CHECK(v >= 0.0);
            CHECK(v <= params.peak_v + 1e-12);
        }
        const double measured = simulate::correlation_length_px(img);
        CHECK(measured == doctest::Approx(8.0).epsilon(0.2));
    }
}

TEST_CASE("spectral phantom mixes exactly two endmembers non-negatively") {
    GridSpec spec{32, 32, 5.0};
    Rng rng(69);
    const std::vector<double> wavenumbers{2856.0, 1550.0, 1470.0};
    const std::vector<std::vector<double>> spectra{{1.0, 0.2, 0.4}, {0.1, 0.9, 0.5}};
    const auto ph = simulate::make_spectral_phantom(spec, rng, {"AT", "ECM"}, spectra,
                                                    wavenumbers, {});
    REQUIRE(ph.truth.channels.size() == 3);
    REQUIRE(ph.weight_maps.size() == 2);
    for (std::size_t px = 0; px < spec.size(); ++px) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const double expect = 0.1 * (ph.weight_maps[0].values[px] * spectra[0][ch] +
                                         ph.weight_maps[1].values[px] * spectra[1][ch]);
            CHECK(ph.truth.channels[ch].values[px] == doctest::Approx(expect).epsilon(1e-12));
            CHECK(ph.truth.channels[ch].values[px] >= 0.0);
        }
    }
}

TEST_CASE("dwell-limited speedup follows the closed form") {
    GridSpec spec{400, 400, 5.0};
    TimingModel tm;  // rep 100 kHz, no overhead, effectively unlimited stage
    const double t_full = simulate::acquisition_time_s({spec, 1, 50, 50}, tm);
    const double t_sparse = simulate::acquisition_time_s({spec, 4, 15, 50}, tm);
    CHECK(simulate::speedup(t_full, t_sparse) == doctest::Approx(40.0 / 3.0).epsilon(1e-12));

    const double t_same = simulate::acquisition_time_s({spec, 1, 50, 50}, tm);
    CHECK(simulate::speedup(t_full, t_same) == doctest::Approx(1.0));
}

TEST_CASE("calibrated timing model reproduces the reference scan times") {
    GridSpec spec{400, 400, 5.0};
    const TimingModel tm = TimingModel::paper_calibrated();
    const double t_full = simulate::acquisition_time_s({spec, 1, 50, 50}, tm);
    const double t_sparse = simulate::acquisition_time_s({spec, 4, 15, 50}, tm);
    CHECK(t_full == doctest::Approx(23.43 * 60.0).epsilon(0.05));
    CHECK(t_sparse == doctest::Approx(2.15 * 60.0).epsilon(0.05));
    CHECK(simulate::speedup(t_full, t_sparse) == doctest::Approx(10.9).epsilon(0.01));
}

TEST_CASE("acquisition time decreases with stride; sparse scans speed up") {
    GridSpec spec{256, 256, 5.0};
    const TimingModel tm = TimingModel::paper_calibrated();
    double prev = 1e300;
    for (std::size_t w : {1, 2, 4, 8}) {
        const double t = simulate::acquisition_time_s({spec, w, 15, 50}, tm);
        CHECK(t < prev);
        prev = t;
    }
    const double t_full = simulate::acquisition_time_s({spec, 1, 50, 50}, tm);
    CHECK(simulate::speedup(t_full, simulate::acquisition_time_s({spec, 2, 50, 50}, tm)) > 1.0);
    CHECK(simulate::speedup(t_full, simulate::acquisition_time_s({spec, 1, 15, 50}, tm)) > 1.0);
}
