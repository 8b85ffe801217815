#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "srm/analyze.hpp"
#include "srm/forward.hpp"
#include "srm/inference.hpp"
#include "srm/types.hpp"

namespace srm::io {

// Dense grid bundle: <prefix>.json manifest + <prefix>.f32 little-endian
// float32 payload, channels contiguous and row-major.
void save_cube(const std::string& prefix, const HyperCube& cube,
               const nlohmann::json& extra = nlohmann::json::object());
HyperCube load_cube(const std::string& prefix);

void save_image(const std::string& prefix, const Image& img,
                const nlohmann::json& extra = nlohmann::json::object());
Image load_image(const std::string& prefix);

nlohmann::json load_manifest(const std::string& prefix);

// Sparse scan bundle: manifest + data vector in scan order.
void save_scan(const std::string& prefix, const forward::SparseScan& scan,
               const nlohmann::json& extra = nlohmann::json::object());
forward::SparseScan load_scan(const std::string& prefix);

// Posterior checkpoint: manifest + float32 binaries for the mean latent and
// the residual samples; enough to resume statistics post hoc.
void save_ensemble(const std::string& prefix, const inference::PosteriorEnsemble& ens);
inference::PosteriorEnsemble load_ensemble(const std::string& prefix);

nlohmann::json prior_config_to_json(const prior::PriorConfig& cfg);
prior::PriorConfig prior_config_from_json(const nlohmann::json& j);

// Two-column text (wavenumber_cm1, value_V) per endmember.
std::pair<std::vector<double>, std::vector<double>> load_endmember_txt(const std::string& path);
void save_endmember_txt(const std::string& path, const std::vector<double>& wavenumbers,
                        const std::vector<double>& values);

enum class Colormap { gray, ice, diverging };

// 8-bit PNG render with min-max scaling (lo == hi requests auto range).
void write_png(const std::string& path, const Image& img, Colormap map = Colormap::gray,
               double lo = 0.0, double hi = 0.0);
// 16-bit grayscale PNG.
void write_png_gray16(const std::string& path, const Image& img, double lo = 0.0,
                      double hi = 0.0);
// Two-channel overlay (first image in magenta, second in green).
void write_png_overlay(const std::string& path, const Image& a, const Image& b);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace srm::io
