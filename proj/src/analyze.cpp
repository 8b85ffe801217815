#include "srm/analyze.hpp"

#include <algorithm>
#include <cmath>

namespace srm::analyze {

namespace {

constexpr double kSsimC1 = 0.0001;
constexpr double kSsimC2 = 0.0009;

void require_compatible(const Image& a, const Image& b, const char* who) {
    if (!a.spec.compatible(b.spec)) throw config_error(std::string(who) + ": grid mismatch");
}

}  // namespace

void EndmemberSet::validate() const {
    if (names.size() != spectra.size())
        throw config_error("EndmemberSet: name/spectrum count mismatch");
    if (spectra.size() < 2) throw config_error("EndmemberSet: need at least two endmembers");
    const std::size_t len = spectra.front().size();
    for (const auto& s : spectra) {
        if (s.size() != len) throw config_error("EndmemberSet: spectra lengths differ");
        if (max_abs(s) == 0.0) throw config_error("EndmemberSet: all-zero spectrum");
    }
}

double ssim(const Image& rc, const Image& gt) {
    require_compatible(rc, gt, "ssim");
    const std::size_t n = rc.values.size();

    double lo = rc.values[0], hi = rc.values[0];
    for (double v : rc.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : gt.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    const double scale = span > 0.0 ? 1.0 / span : 0.0;

    double mu_rc = 0.0, mu_gt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mu_rc += (rc.values[i] - lo) * scale;
        mu_gt += (gt.values[i] - lo) * scale;
    }
    mu_rc /= static_cast<double>(n);
    mu_gt /= static_cast<double>(n);

    double var_rc = 0.0, var_gt = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (rc.values[i] - lo) * scale - mu_rc;
        const double y = (gt.values[i] - lo) * scale - mu_gt;
        var_rc += x * x;
        var_gt += y * y;
        cov += x * y;
    }
    var_rc /= static_cast<double>(n);
    var_gt /= static_cast<double>(n);
    cov /= static_cast<double>(n);

    return ((2.0 * mu_rc * mu_gt + kSsimC1) * (2.0 * cov + kSsimC2)) /
           ((mu_rc * mu_rc + mu_gt * mu_gt + kSsimC1) * (var_rc + var_gt + kSsimC2));
}

double mrsd(const Image& mean_img, const Image& std_img) {
    require_compatible(mean_img, std_img, "mrsd");
    double acc = 0.0;
    for (std::size_t i = 0; i < mean_img.values.size(); ++i) {
        if (!(mean_img.values[i] > 0.0))
            throw numerical_error("mrsd: non-positive posterior mean pixel");
        acc += std_img.values[i] / mean_img.values[i];
    }
    return acc / static_cast<double>(mean_img.values.size());
}

Image error_map(const Image& rc, const Image& gt) {
    require_compatible(rc, gt, "error_map");
    Image out(rc.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = std::abs(rc.values[i] - gt.values[i]);
    return out;
}

double mae(const Image& rc, const Image& gt) {
    const Image err = error_map(rc, gt);
    return sum(err.values) / static_cast<double>(err.values.size());
}

double mre_spectrum(const std::vector<double>& rc_spectrum,
                    const std::vector<double>& gt_spectrum, std::size_t* excluded_channels) {
    if (rc_spectrum.size() != gt_spectrum.size())
        throw config_error("mre_spectrum: length mismatch");
    double acc = 0.0;
    std::size_t used = 0, excluded = 0;
    for (std::size_t i = 0; i < gt_spectrum.size(); ++i) {
        if (gt_spectrum[i] == 0.0) {
            ++excluded;
            continue;
        }
        acc += std::abs(rc_spectrum[i] - gt_spectrum[i]) / std::abs(gt_spectrum[i]);
        ++used;
    }
    if (excluded_channels != nullptr) *excluded_channels = excluded;
    if (used == 0) throw config_error("mre_spectrum: all ground-truth channels are zero");
    return acc / static_cast<double>(used);
}

Histogram rsd_histogram(const Image& mean_img, const Image& std_img, std::size_t n_bins) {
    require_compatible(mean_img, std_img, "rsd_histogram");
    if (n_bins < 1) throw config_error("rsd_histogram: need at least one bin");
    std::vector<double> rsd(mean_img.values.size());
    double hi = 0.0;
    for (std::size_t i = 0; i < rsd.size(); ++i) {
        if (!(mean_img.values[i] > 0.0))
            throw numerical_error("rsd_histogram: non-positive posterior mean pixel");
        rsd[i] = std_img.values[i] / mean_img.values[i];
        hi = std::max(hi, rsd[i]);
    }
    if (hi == 0.0) hi = 1.0;

    Histogram h;
    h.edges.resize(n_bins + 1);
    h.counts.assign(n_bins, 0);
    for (std::size_t b = 0; b <= n_bins; ++b)
        h.edges[b] = hi * static_cast<double>(b) / static_cast<double>(n_bins);
    for (double v : rsd) {
        std::size_t b = static_cast<std::size_t>(v / hi * static_cast<double>(n_bins));
        if (b >= n_bins) b = n_bins - 1;
        ++h.counts[b];
    }
    return h;
}

Image backprojection_display(const forward::SparseScan& scan) {
    scan.validate();
    return forward::apply_stages_adjoint(scan.data, scan.pattern);
}

Image clahe(const Image& img, std::size_t tiles, double clip_limit) {
    if (tiles < 1) throw config_error("clahe: need at least one tile");
    if (!(clip_limit > 0.0)) throw config_error("clahe: clip limit must be > 0");
    const std::size_t n = img.spec.n_rows, m = img.spec.m_cols;

    double lo = img.values[0], hi = img.values[0];
    for (double v : img.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) return img;  // no contrast to equalize
    const double scale = 1.0 / (hi - lo);

    constexpr std::size_t kBins = 256;
    const std::size_t ty = std::min(tiles, n), tx = std::min(tiles, m);
    auto tile_of = [](std::size_t idx, std::size_t extent, std::size_t count) {
        return std::min(idx * count / extent, count - 1);
    };

    // Clipped per-tile CDF mappings.
    std::vector<std::vector<double>> mapping(ty * tx, std::vector<double>(kBins, 0.0));
    std::vector<std::vector<std::size_t>> hist(ty * tx, std::vector<std::size_t>(kBins, 0));
    std::vector<std::size_t> tile_count(ty * tx, 0);
    auto bin_of = [&](double v) {
        auto b = static_cast<std::size_t>((v - lo) * scale * static_cast<double>(kBins));
        return std::min(b, kBins - 1);
    };
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            const std::size_t t = tile_of(r, n, ty) * tx + tile_of(c, m, tx);
            ++hist[t][bin_of(img.at(r, c))];
            ++tile_count[t];
        }
    for (std::size_t t = 0; t < ty * tx; ++t) {
        if (tile_count[t] == 0) continue;
        const double uniform = static_cast<double>(tile_count[t]) / static_cast<double>(kBins);
        const double cap = clip_limit * uniform;
        std::vector<double> clipped(kBins);
        double excess = 0.0;
        for (std::size_t b = 0; b < kBins; ++b) {
            const double hv = static_cast<double>(hist[t][b]);
            clipped[b] = std::min(hv, cap);
            excess += hv - clipped[b];
        }
        const double redistribute = excess / static_cast<double>(kBins);
        double cum = 0.0;
        for (std::size_t b = 0; b < kBins; ++b) {
            cum += clipped[b] + redistribute;
            mapping[t][b] = cum / static_cast<double>(tile_count[t]);
        }
    }

    // Bilinear interpolation between tile mappings.
    Image out(img.spec);
    const double tile_h = static_cast<double>(n) / static_cast<double>(ty);
    const double tile_w = static_cast<double>(m) / static_cast<double>(tx);
    for (std::size_t r = 0; r < n; ++r) {
        const double fy = (static_cast<double>(r) + 0.5) / tile_h - 0.5;
        const long y0l = static_cast<long>(std::floor(fy));
        const std::size_t y0 = static_cast<std::size_t>(std::clamp<long>(y0l, 0, static_cast<long>(ty) - 1));
        const std::size_t y1 = static_cast<std::size_t>(std::clamp<long>(y0l + 1, 0, static_cast<long>(ty) - 1));
        const double wy = std::clamp(fy - static_cast<double>(y0l), 0.0, 1.0);
        for (std::size_t c = 0; c < m; ++c) {
            const double fx = (static_cast<double>(c) + 0.5) / tile_w - 0.5;
            const long x0l = static_cast<long>(std::floor(fx));
            const std::size_t x0 = static_cast<std::size_t>(std::clamp<long>(x0l, 0, static_cast<long>(tx) - 1));
            const std::size_t x1 = static_cast<std::size_t>(std::clamp<long>(x0l + 1, 0, static_cast<long>(tx) - 1));
            const double wx = std::clamp(fx - static_cast<double>(x0l), 0.0, 1.0);
            const std::size_t b = bin_of(img.at(r, c));
            const double v00 = mapping[y0 * tx + x0][b];
            const double v01 = mapping[y0 * tx + x1][b];
            const double v10 = mapping[y1 * tx + x0][b];
            const double v11 = mapping[y1 * tx + x1][b];
            out.at(r, c) = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                           wy * ((1.0 - wx) * v10 + wx * v11);
        }
    }
    return out;
}

namespace {

// Dense symmetric eigendecomposition (cyclic Jacobi) for the tiny
// endmember Gram matrices.
void jacobi_eigen(std::vector<double>& a, std::size_t k, std::vector<double>& eigvecs,
                  std::vector<double>& eigvals) {
    eigvecs.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) eigvecs[i * k + i] = 1.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) off += a[p * k + q] * a[p * k + q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                if (a[p * k + q] == 0.0) continue;
                const double theta = (a[q * k + q] - a[p * k + p]) / (2.0 * a[p * k + q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < k; ++i) {
                    const double aip = a[i * k + p], aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double api = a[p * k + i], aqi = a[q * k + i];
                    a[p * k + i] = c * api - s * aqi;
                    a[q * k + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double vip = eigvecs[i * k + p], viq = eigvecs[i * k + q];
                    eigvecs[i * k + p] = c * vip - s * viq;
                    eigvecs[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    eigvals.resize(k);
    for (std::size_t i = 0; i < k; ++i) eigvals[i] = a[i * k + i];
}

// Minimum-norm solve of (G + 0) x = rhs via eigendecomposition; flags rank
// deficiency.
std::vector<double> solve_gram(const std::vector<double>& gram,
                               const std::vector<double>& rhs, std::size_t k,
                               bool* degenerate) {
    std::vector<double> a = gram, vecs, vals;
    jacobi_eigen(a, k, vecs, vals);
    double max_ev = 0.0;
    for (double v : vals) max_ev = std::max(max_ev, std::abs(v));
    const double cutoff = std::max(max_ev, 1e-300) * 1e-12;

    std::vector<double> x(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        if (std::abs(vals[j]) <= cutoff) {
            if (degenerate != nullptr) *degenerate = true;
            continue;
        }
        double proj = 0.0;
        for (std::size_t i = 0; i < k; ++i) proj += vecs[i * k + j] * rhs[i];
        proj /= vals[j];
        for (std::size_t i = 0; i < k; ++i) x[i] += vecs[i * k + j] * proj;
    }
    return x;
}

}  // namespace

UnmixResult unmix_pixel(const std::vector<double>& spectrum, const EndmemberSet& endmembers) {
    endmembers.validate();
    const std::size_t k = endmembers.spectra.size();
    const std::size_t len = endmembers.spectra.front().size();
    if (spectrum.size() != len) throw config_error("unmix_pixel: spectrum length mismatch");

    // Gram matrix and projections; the active-set iteration never needs the
    // raw spectra again.
    std::vector<double> gram(k * k), proj(k);
    for (std::size_t i = 0; i < k; ++i) {
        proj[i] = dot(endmembers.spectra[i], spectrum);
        for (std::size_t j = 0; j < k; ++j)
            gram[i * k + j] = dot(endmembers.spectra[i], endmembers.spectra[j]);
    }

    double gram_scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) gram_scale = std::max(gram_scale, gram[i * k + i]);
    const double spectrum_norm = std::sqrt(dot(spectrum, spectrum));
    const double grad_tol = 1e-12 * std::max(1.0, std::sqrt(gram_scale) * spectrum_norm);

    UnmixResult result;
    result.coefficients.assign(k, 0.0);

    // A rank-deficient endmember matrix is reported up front; singular
    // passive-set solves below then fall back to the minimum-norm solution.
    {
        std::vector<double> full = gram, vecs, vals;
        jacobi_eigen(full, k, vecs, vals);
        double max_ev = 0.0;
        for (double v : vals) max_ev = std::max(max_ev, std::abs(v));
        for (double v : vals)
            if (std::abs(v) <= std::max(max_ev, 1e-300) * 1e-12) result.degenerate = true;
    }


    std::vector<bool> passive(k, false);
    std::vector<double>& x = result.coefficients;

    for (std::size_t outer = 0; outer < 3 * k + 10; ++outer) {
        // Gradient of 1/2 |Ax - y|^2 is Gx - proj; move the most negative
        // component into the passive set.
        double best = -grad_tol;
        std::size_t best_j = k;
        for (std::size_t j = 0; j < k; ++j) {
            if (passive[j]) continue;
            double g = -proj[j];
            for (std::size_t i = 0; i < k; ++i) g += gram[j * k + i] * x[i];
            if (g < best) {
                best = g;
                best_j = j;
            }
        }
        if (best_j == k) break;  // KKT satisfied
        passive[best_j] = true;

        for (std::size_t inner = 0; inner < 3 * k + 10; ++inner) {
            // Unconstrained solve on the passive set.
            std::vector<std::size_t> idx;
            for (std::size_t j = 0; j < k; ++j)
                if (passive[j]) idx.push_back(j);
            const std::size_t kp = idx.size();
            std::vector<double> sub_gram(kp * kp), sub_rhs(kp);
            for (std::size_t i = 0; i < kp; ++i) {
                sub_rhs[i] = proj[idx[i]];
                for (std::size_t j = 0; j < kp; ++j)
                    sub_gram[i * kp + j] = gram[idx[i] * k + idx[j]];
            }
            const std::vector<double> z_sub =
                solve_gram(sub_gram, sub_rhs, kp, &result.degenerate);

            std::vector<double> z(k, 0.0);
            bool feasible = true;
            for (std::size_t i = 0; i < kp; ++i) {
                z[idx[i]] = z_sub[i];
                if (z_sub[i] <= 0.0) feasible = false;
            }
            if (feasible) {
                x = z;
                break;
            }

            // Step to the boundary and retire the vanished coordinates.
            double alpha = 1.0;
            for (std::size_t i = 0; i < kp; ++i) {
                const std::size_t j = idx[i];
                if (z[j] <= 0.0 && x[j] != z[j])
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
            }
            for (std::size_t j = 0; j < k; ++j) x[j] += alpha * (z[j] - x[j]);
            for (std::size_t j = 0; j < k; ++j)
                if (passive[j] && x[j] <= grad_tol * 1e-3) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
        }
    }
    for (double& v : x) v = std::max(v, 0.0);
    return result;
}

CubeUnmixResult unmix_cube(const HyperCube& cube, const EndmemberSet& endmembers) {
    cube.validate();
    endmembers.validate();
    if (endmembers.spectra.front().size() != cube.channels.size())
        throw config_error("unmix_cube: endmember spectra do not match cube channels");

    const std::size_t k = endmembers.spectra.size();
    CubeUnmixResult out;
    out.coefficient_maps.assign(k, Image(cube.spec, 0.0));
    out.composition.assign(k, 0.0);

    std::vector<double> spectrum(cube.channels.size());
    for (std::size_t px = 0; px < cube.spec.size(); ++px) {
        for (std::size_t ch = 0; ch < cube.channels.size(); ++ch)
            spectrum[ch] = cube.channels[ch].values[px];
        UnmixResult r = unmix_pixel(spectrum, endmembers);
        if (r.degenerate) ++out.degenerate_pixels;
        for (std::size_t j = 0; j < k; ++j) {
            out.coefficient_maps[j].values[px] = r.coefficients[j];
            out.composition[j] += r.coefficients[j];
        }
    }
    const double total = sum(out.composition);
    if (total > 0.0)
        for (double& c : out.composition) c /= total;
    return out;
}

}  // namespace srm::analyze
