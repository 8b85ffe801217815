#include <doctest.h>

#include <cmath>

#include "srm/fft.hpp"
#include "srm/grid.hpp"
#include "srm/rng.hpp"

using namespace srm;

namespace {

Image random_image(std::size_t n, std::size_t m, Rng& rng, double pixel_um = 5.0) {
    Image img(GridSpec{n, m, pixel_um});
    for (double& v : img.values) v = rng.normal();
    return img;
}

}  // namespace

TEST_CASE("hartley transform of a constant 1x4 field carries sqrt(N) * mean in DC") {
    Image field(GridSpec{1, 4, 5.0}, std::vector<double>{1.0, 1.0, 1.0, 1.0});
    Image ht = grid::hartley_transform(field);
    CHECK(ht.values[0] == doctest::Approx(2.0).epsilon(1e-12));
    for (std::size_t i = 1; i < 4; ++i)
        CHECK(std::abs(ht.values[i]) < 1e-12);
}

TEST_CASE("hartley transform of 1x2 [1,-1] is [0, sqrt(2)]") {
    Image field(GridSpec{1, 2, 5.0}, std::vector<double>{1.0, -1.0});
    Image ht = grid::hartley_transform(field);
    CHECK(std::abs(ht.values[0]) < 1e-14);
    CHECK(ht.values[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("hartley transform is an involution") {
    Rng rng(11);
    for (auto [n, m] : {std::pair<std::size_t, std::size_t>{16, 16},
                        {7, 5},
                        {1, 131},
                        {64, 64},
                        {3, 50}}) {
        Image x = random_image(n, m, rng);
        Image back = grid::hartley_transform(grid::hartley_transform(x));
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < x.values.size(); ++i) {
            err = std::max(err, std::abs(back.values[i] - x.values[i]));
            scale = std::max(scale, std::abs(x.values[i]));
        }
        CHECK(err <= 1e-12 * scale);
    }
}

TEST_CASE("hartley transform is self-adjoint") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        Image x = random_image(12, 9, rng);
        Image y = random_image(12, 9, rng);
        const double lhs = dot(grid::hartley_transform(x).values, y.values);
        const double rhs = dot(x.values, grid::hartley_transform(y).values);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1.0));
    }
}

TEST_CASE("gaussian convolution preserves constants") {
    Image field(GridSpec{8, 8, 5.0}, 3.25);
    Image out = grid::convolve_gaussian(field, 10.0);
    for (double v : out.values) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("gaussian convolution impulse response is a centered symmetric bump") {
    const std::size_t n = 33;
    Image field(GridSpec{n, n, 5.0}, 0.0);
    field.at(16, 16) = 1.0;
    Image out = grid::convolve_gaussian(field, 10.0);  // sigma = 2 px

    // Peak at the impulse.
    double peak = -1.0;
    std::size_t peak_idx = 0;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (out.values[i] > peak) {
            peak = out.values[i];
            peak_idx = i;
        }
    CHECK(peak_idx == 16 * n + 16);

    // Radial symmetry and the sampled-Gaussian ratio at one-sigma offsets.
    CHECK(out.at(16, 18) == doctest::Approx(out.at(18, 16)).epsilon(1e-9));
    CHECK(out.at(16, 14) == doctest::Approx(out.at(16, 18)).epsilon(1e-9));
    CHECK(out.at(14, 16) == doctest::Approx(out.at(18, 16)).epsilon(1e-9));
    CHECK(out.at(16, 18) / peak == doctest::Approx(std::exp(-0.5)).epsilon(1e-3));
}

TEST_CASE("gaussian convolution preserves the sum") {
    Rng rng(13);
    Image field(GridSpec{16, 16, 5.0});
    for (double& v : field.values) v = rng.uniform();
    const double before = sum(field.values);
    const double after = sum(grid::convolve_gaussian(field, 12.5).values);
    CHECK(std::abs(after - before) <= 1e-9 * std::abs(before));
}

TEST_CASE("gaussian convolution is linear and self-adjoint") {
    Rng rng(14);
    const double sigma = 7.0;
    Image x = random_image(16, 16, rng);
    Image y = random_image(16, 16, rng);

    Image combo(GridSpec{16, 16, 5.0});
    for (std::size_t i = 0; i < combo.values.size(); ++i)
        combo.values[i] = 2.5 * x.values[i] - 1.25 * y.values[i];
    Image conv_combo = grid::convolve_gaussian(combo, sigma);
    Image cx = grid::convolve_gaussian(x, sigma);
    Image cy = grid::convolve_gaussian(y, sigma);
    for (std::size_t i = 0; i < combo.values.size(); ++i) {
        const double expect = 2.5 * cx.values[i] - 1.25 * cy.values[i];
        CHECK(conv_combo.values[i] == doctest::Approx(expect).epsilon(1e-10));
    }

    const double lhs = dot(cx.values, y.values);
    const double rhs = dot(x.values, cy.values);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1.0}));
}

TEST_CASE("convolve_gaussian rejects non-positive sigma") {
    Image field(GridSpec{4, 4, 5.0}, 1.0);
    CHECK_THROWS_AS(grid::convolve_gaussian(field, 0.0), config_error);
    CHECK_THROWS_AS(grid::convolve_gaussian(field, -1.0), config_error);
}

TEST_CASE("pad and crop with margin zero are the identity") {
    Rng rng(15);
    Image x = random_image(4, 6, rng);
    CHECK(grid::pad_reflect(x, 0).values == x.values);
    CHECK(grid::crop(x, 0).values == x.values);
}

TEST_CASE("crop undoes pad_reflect bit-exactly") {
    Rng rng(16);
    Image x = random_image(4, 4, rng);
    Image roundtrip = grid::crop(grid::pad_reflect(x, 2), 2);
    CHECK(roundtrip.values == x.values);
}

TEST_CASE("pad_reflect mirrors without repeating the edge sample") {
    Image x(GridSpec{1, 3, 5.0}, std::vector<double>{1.0, 2.0, 3.0});
    Image padded = grid::pad_reflect(x, 0, 1);
    CHECK(padded.values == std::vector<double>{2.0, 1.0, 2.0, 3.0, 2.0});
}

TEST_CASE("crop rejects margins that would empty the field") {
    Image x(GridSpec{4, 4, 5.0}, 0.0);
    CHECK_THROWS_AS(grid::crop(x, 2), config_error);
}

TEST_CASE("pad_reflect_adjoint is the exact adjoint of pad_reflect") {
    Rng rng(17);
    Image x = random_image(5, 7, rng);
    Image y = random_image(5 + 2 * 3, 7 + 2 * 2, rng);
    const double lhs = dot(grid::pad_reflect(x, 3, 2).values, y.values);
    const double rhs = dot(x.values, grid::pad_reflect_adjoint(y, 3, 2).values);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("resample_bilinear is exact on identical specs") {
    Rng rng(18);
    Image x = random_image(9, 5, rng);
    Image out = grid::resample_bilinear(x, x.spec);
    CHECK(out.values == x.values);
}

TEST_CASE("resample_bilinear hits the linear midpoint") {
    Image x(GridSpec{1, 2, 10.0}, std::vector<double>{0.0, 1.0});
    Image out = grid::resample_bilinear(x, GridSpec{1, 3, 5.0});
    CHECK(out.values[0] == doctest::Approx(0.0));
    CHECK(out.values[1] == doctest::Approx(0.5));
    CHECK(out.values[2] == doctest::Approx(1.0));
}

TEST_CASE("resample_bilinear maps constants to constants") {
    Image x(GridSpec{6, 6, 5.0}, 1.75);
    for (auto [n, m] : {std::pair<std::size_t, std::size_t>{3, 11}, {17, 2}, {1, 1}}) {
        Image out = grid::resample_bilinear(x, GridSpec{n, m, 5.0});
        for (double v : out.values) CHECK(v == doctest::Approx(1.75).epsilon(1e-12));
    }
}

TEST_CASE("good_size returns 2/3/5-smooth sizes") {
    CHECK(fft::good_size(1) == 1);
    CHECK(fft::good_size(256) == 256);
    CHECK(fft::good_size(257) == 270);
    CHECK(fft::good_size(262) == 270);
    CHECK(fft::good_size(97) == 100);
}
