#include "srm/types.hpp"

#include <cmath>

namespace srm {

void HyperCube::validate() const {
    spec.validate();
    if (channels.size() != wavenumbers_cm1.size())
        throw config_error("HyperCube: channel count does not match wavenumber count");
    for (std::size_t i = 0; i < wavenumbers_cm1.size(); ++i)
        for (std::size_t j = i + 1; j < wavenumbers_cm1.size(); ++j)
            if (wavenumbers_cm1[i] == wavenumbers_cm1[j])
                throw config_error("HyperCube: duplicate wavenumber");
    for (const Image& ch : channels)
        if (!ch.spec.compatible(spec))
            throw config_error("HyperCube: channel grid mismatch");
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace srm
