#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace srm {

// Thrown for invalid parameters / malformed inputs (CLI exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a computation produces non-finite or otherwise unusable
// numbers (CLI exit code 3).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on file I/O failures (CLI exit code 4).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Regular pixel grid: row index is the slow raster axis (scan lines are
// rows), storage is row-major.
struct GridSpec {
    std::size_t n_rows = 0;
    std::size_t m_cols = 0;
    double pixel_size_um = 0.0;

    std::size_t size() const { return n_rows * m_cols; }

    bool compatible(const GridSpec& other) const {
        return n_rows == other.n_rows && m_cols == other.m_cols &&
               pixel_size_um == other.pixel_size_um;
    }

    void validate() const {
        if (n_rows < 1 || m_cols < 1)
            throw config_error("GridSpec: dimensions must be >= 1");
        if (!(pixel_size_um > 0.0))
            throw config_error("GridSpec: pixel size must be > 0");
    }
};

// Dense real-valued field on a pixel grid. Values are optoacoustic
// peak-to-peak amplitudes in volts.
struct Image {
    GridSpec spec;
    std::vector<double> values;

    Image() = default;
    Image(GridSpec s, double fill = 0.0) : spec(s), values(s.size(), fill) {}
    Image(GridSpec s, std::vector<double> v) : spec(s), values(std::move(v)) {
        if (values.size() != spec.size())
            throw config_error("Image: value count does not match grid");
    }

    double& at(std::size_t row, std::size_t col) {
        return values[row * spec.m_cols + col];
    }
    double at(std::size_t row, std::size_t col) const {
        return values[row * spec.m_cols + col];
    }
};

// Stack of per-wavenumber channels on a common grid.
struct HyperCube {
    GridSpec spec;
    std::vector<double> wavenumbers_cm1;
    std::vector<Image> channels;

    void validate() const;
};

bool all_finite(const std::vector<double>& v);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double sum(const std::vector<double>& v);
double max_abs(const std::vector<double>& v);

}  // namespace srm
