#pragma once

// Test-only NNLS oracle: enumerate every active set, solve the unconstrained
// least squares on it by Gaussian elimination, keep the best feasible fit.
// Stays independent of the active-set solver under test.

#include <cmath>
#include <cstddef>
#include <vector>

#include "srm/analyze.hpp"

namespace srm_test {

inline double nnls_residual_norm2(const srm::analyze::EndmemberSet& set,
                                  const std::vector<double>& y,
                                  const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < y.size(); ++ch) {
        double model = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) model += x[j] * set.spectra[j][ch];
        acc += (model - y[ch]) * (model - y[ch]);
    }
    return acc;
}

inline std::vector<double> nnls_brute_force(const srm::analyze::EndmemberSet& set,
                                            const std::vector<double>& y) {
    const std::size_t k = set.spectra.size();
    std::vector<double> best(k, 0.0);
    double best_obj = nnls_residual_norm2(set, y, best);

    for (std::size_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < k; ++j)
            if (mask & (1u << j)) idx.push_back(j);
        const std::size_t kp = idx.size();

        std::vector<double> gram(kp * kp), rhs(kp);
        for (std::size_t i = 0; i < kp; ++i) {
            rhs[i] = srm::dot(set.spectra[idx[i]], y);
            for (std::size_t j = 0; j < kp; ++j)
                gram[i * kp + j] = srm::dot(set.spectra[idx[i]], set.spectra[idx[j]]);
        }
        std::vector<double> a = gram, b = rhs;
        bool singular = false;
        for (std::size_t col = 0; col < kp && !singular; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < kp; ++r)
                if (std::abs(a[r * kp + col]) > std::abs(a[pivot * kp + col])) pivot = r;
            if (std::abs(a[pivot * kp + col]) < 1e-12) {
                singular = true;
                break;
            }
            for (std::size_t c = 0; c < kp; ++c) std::swap(a[col * kp + c], a[pivot * kp + c]);
            std::swap(b[col], b[pivot]);
            for (std::size_t r = 0; r < kp; ++r) {
                if (r == col) continue;
                const double f = a[r * kp + col] / a[col * kp + col];
                for (std::size_t c = 0; c < kp; ++c) a[r * kp + c] -= f * a[col * kp + c];
                b[r] -= f * b[col];
            }
        }
        if (singular) continue;

        std::vector<double> x(k, 0.0);
        bool feasible = true;
        for (std::size_t i = 0; i < kp; ++i) {
            const double xi = b[i] / a[i * kp + i];
            if (xi < 0.0) feasible = false;
            x[idx[i]] = xi;
        }
        if (!feasible) continue;
        const double obj = nnls_residual_norm2(set, y, x);
        if (obj < best_obj) {
            best_obj = obj;
            best = x;
        }
    }
    return best;
}

}  // namespace srm_test
