#pragma once

#include "srm/types.hpp"

namespace srm::grid {

// Real harmonic transform: Re - Im of the unitary 2D DFT. Involutory and
// self-adjoint, which the generative prior relies on.
Image hartley_transform(const Image& field);
void hartley_transform(std::size_t rows, std::size_t cols,
                       const std::vector<double>& in, std::vector<double>& out);

// Circular (periodic) Gaussian convolution in the harmonic domain. The
// filter is the sampled frequency response exp(-2 pi^2 sigma_px^2 |f|^2),
// so the DC gain is exactly 1 and the operator is exactly self-adjoint.
// Boundary handling (reflect-pad before, crop after) is composed around
// this op by the measurement chain.
Image convolve_gaussian(const Image& field, double sigma_um);

// Reflect-pad margin used around the periodic convolution: at least
// ceil(3 sigma_px), then grown until the padded extent is a 2/3/5-smooth
// FFT size.
std::size_t conv_margin(std::size_t extent, double sigma_px);

// Squared harmonic response of convolve_gaussian on the full wavevector
// lattice (all ones for sub-resolution kernels).
std::vector<double> gaussian_filter_power(const GridSpec& spec, double sigma_um);

// Kernels narrower than this (in pixels) act as the identity.
inline constexpr double kMinSigmaPx = 0.05;

Image pad_reflect(const Image& field, std::size_t margin);
Image pad_reflect(const Image& field, std::size_t margin_rows, std::size_t margin_cols);
Image crop(const Image& field, std::size_t margin);
Image crop(const Image& field, std::size_t margin_rows, std::size_t margin_cols);

// Exact adjoint of pad_reflect: fold every padded sample back onto its
// mirror source.
Image pad_reflect_adjoint(const Image& padded, std::size_t margin_rows,
                          std::size_t margin_cols);

// Window extraction and its exact adjoint (zero-embedding); the linearized
// measurement chain needs the pair.
Image extract_window(const Image& field, std::size_t row0, std::size_t col0,
                     std::size_t n_rows, std::size_t m_cols);
Image embed_window(const Image& inner, const GridSpec& outer, std::size_t row0,
                   std::size_t col0);

// Bilinear resampling with field-of-view corners aligned; exact copy when
// target equals the source spec.
Image resample_bilinear(const Image& field, const GridSpec& target);

}  // namespace srm::grid
