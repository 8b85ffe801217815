#include "srm/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <utility>

namespace srm::fft {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

std::mutex g_plan_mutex;
std::map<std::pair<std::size_t, std::size_t>, PlanPair>& plan_cache() {
    static std::map<std::pair<std::size_t, std::size_t>, PlanPair> cache;
    return cache;
}

PlanPair get_plans(std::size_t rows, std::size_t cols) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find({rows, cols});
    if (it != cache.end()) return it->second;

    const std::size_t hc = half_cols(cols);
    double* re = fftw_alloc_real(rows * cols);
    fftw_complex* cx = fftw_alloc_complex(rows * hc);
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c_2d(static_cast<int>(rows), static_cast<int>(cols),
                                 re, cx, FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_c2r_2d(static_cast<int>(rows), static_cast<int>(cols),
                                 cx, re, FFTW_ESTIMATE);
    fftw_free(re);
    fftw_free(cx);
    cache[{rows, cols}] = p;
    return p;
}

// Per-thread aligned workspaces; plans were created on fftw_malloc'd buffers,
// so new-array execution requires the same alignment.
struct Workspace {
    double* re = nullptr;
    fftw_complex* cx = nullptr;
    std::size_t re_cap = 0, cx_cap = 0;

    void ensure(std::size_t re_n, std::size_t cx_n) {
        if (re_n > re_cap) {
            fftw_free(re);
            re = fftw_alloc_real(re_n);
            re_cap = re_n;
        }
        if (cx_n > cx_cap) {
            fftw_free(cx);
            cx = fftw_alloc_complex(cx_n);
            cx_cap = cx_n;
        }
    }
    ~Workspace() {
        fftw_free(re);
        fftw_free(cx);
    }
};

thread_local Workspace t_ws;

}  // namespace

std::size_t half_cols(std::size_t cols) { return cols / 2 + 1; }

void forward_r2c(std::size_t rows, std::size_t cols, const double* in,
                 std::complex<double>* out) {
    PlanPair p = get_plans(rows, cols);
    const std::size_t hc = half_cols(cols);
    t_ws.ensure(rows * cols, rows * hc);
    std::memcpy(t_ws.re, in, rows * cols * sizeof(double));
    fftw_execute_dft_r2c(p.fwd, t_ws.re, t_ws.cx);
    std::memcpy(out, t_ws.cx, rows * hc * sizeof(fftw_complex));
}

void inverse_c2r(std::size_t rows, std::size_t cols,
                 const std::complex<double>* in, double* out) {
    PlanPair p = get_plans(rows, cols);
    const std::size_t hc = half_cols(cols);
    t_ws.ensure(rows * cols, rows * hc);
    // c2r clobbers its input, so run on the scratch copy.
    std::memcpy(t_ws.cx, in, rows * hc * sizeof(fftw_complex));
    fftw_execute_dft_c2r(p.inv, t_ws.cx, t_ws.re);
    std::memcpy(out, t_ws.re, rows * cols * sizeof(double));
}

std::size_t good_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t c = n;; ++c) {
        std::size_t r = c;
        for (std::size_t f : {2u, 3u, 5u})
            while (r % f == 0) r /= f;
        if (r == 1) return c;
    }
}

}  // namespace srm::fft
