#pragma once

#include <complex>
#include <cstddef>

namespace srm::fft {

// Unnormalized 2D transforms of real data, backed by FFTW. Plans are cached
// per shape; execution is thread-safe. The half-spectrum layout is
// rows x (cols/2 + 1), row-major, matching FFTW's r2c convention.
std::size_t half_cols(std::size_t cols);

void forward_r2c(std::size_t rows, std::size_t cols, const double* in,
                 std::complex<double>* out);

void inverse_c2r(std::size_t rows, std::size_t cols,
                 const std::complex<double>* in, double* out);

// Smallest integer >= n whose prime factors are all in {2, 3, 5}.
std::size_t good_size(std::size_t n);

}  // namespace srm::fft
