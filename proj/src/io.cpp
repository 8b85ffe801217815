#include "srm/io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "grid binaries are little-endian float32");

namespace srm::io {

namespace {

void write_f32(const std::string& path, const std::vector<const std::vector<double>*>& blocks) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path);
    for (const auto* block : blocks) {
        std::vector<float> buf(block->size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>((*block)[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!out) throw io_error("short write: " + path);
}

std::vector<double> read_f32(const std::string& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw io_error("cannot open: " + path);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != expected * sizeof(float))
        throw io_error("unexpected payload size in " + path);
    in.seekg(0);
    std::vector<float> buf(expected);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw io_error("short read: " + path);
    return {buf.begin(), buf.end()};
}

GridSpec spec_from_json(const nlohmann::json& j) {
    GridSpec spec{j.at("n_rows").get<std::size_t>(), j.at("m_cols").get<std::size_t>(),
                  j.at("pixel_size_um").get<double>()};
    spec.validate();
    return spec;
}

}  // namespace

void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw io_error("short write: " + path);
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

nlohmann::json load_manifest(const std::string& prefix) { return read_json(prefix + ".json"); }

void save_cube(const std::string& prefix, const HyperCube& cube, const nlohmann::json& extra) {
    cube.validate();
    nlohmann::json manifest = extra;
    manifest["n_rows"] = cube.spec.n_rows;
    manifest["m_cols"] = cube.spec.m_cols;
    manifest["pixel_size_um"] = cube.spec.pixel_size_um;
    if (!(cube.wavenumbers_cm1.size() == 1 && cube.wavenumbers_cm1[0] == 0.0))
        manifest["wavenumbers_cm1"] = cube.wavenumbers_cm1;
    save_json(prefix + ".json", manifest);

    std::vector<const std::vector<double>*> blocks;
    blocks.reserve(cube.channels.size());
    for (const Image& ch : cube.channels) blocks.push_back(&ch.values);
    write_f32(prefix + ".f32", blocks);
}

HyperCube load_cube(const std::string& prefix) {
    const nlohmann::json manifest = load_manifest(prefix);
    HyperCube cube;
    cube.spec = spec_from_json(manifest);
    if (manifest.contains("wavenumbers_cm1"))
        cube.wavenumbers_cm1 = manifest.at("wavenumbers_cm1").get<std::vector<double>>();
    else
        cube.wavenumbers_cm1 = {0.0};

    const std::size_t per_channel = cube.spec.size();
    const std::vector<double> all =
        read_f32(prefix + ".f32", per_channel * cube.wavenumbers_cm1.size());
    for (std::size_t ch = 0; ch < cube.wavenumbers_cm1.size(); ++ch) {
        Image img(cube.spec);
        std::copy(all.begin() + static_cast<std::ptrdiff_t>(ch * per_channel),
                  all.begin() + static_cast<std::ptrdiff_t>((ch + 1) * per_channel),
                  img.values.begin());
        cube.channels.push_back(std::move(img));
    }
    cube.validate();
    return cube;
}

void save_image(const std::string& prefix, const Image& img, const nlohmann::json& extra) {
    HyperCube cube;
    cube.spec = img.spec;
    cube.wavenumbers_cm1 = {0.0};
    cube.channels = {img};
    save_cube(prefix, cube, extra);
}

Image load_image(const std::string& prefix) {
    HyperCube cube = load_cube(prefix);
    if (cube.channels.size() != 1)
        throw io_error(prefix + ": expected a single-channel grid");
    return cube.channels.front();
}

void save_scan(const std::string& prefix, const forward::SparseScan& scan,
               const nlohmann::json& extra) {
    scan.validate();
    nlohmann::json manifest = extra;
    manifest["n_rows"] = scan.pattern.full_spec.n_rows;
    manifest["m_cols"] = scan.pattern.full_spec.m_cols;
    manifest["pixel_size_um"] = scan.pattern.full_spec.pixel_size_um;
    manifest["stride_w"] = scan.pattern.stride_w;
    manifest["pulses_per_pixel"] = scan.pattern.pulses_per_pixel;
    manifest["pulses_full"] = scan.pattern.pulses_full;
    manifest["sigma_v"] = scan.noise.sigma_v;
    manifest["wavenumber_cm1"] = scan.wavenumber_cm1;
    save_json(prefix + ".json", manifest);
    write_f32(prefix + ".f32", {&scan.data});
}

forward::SparseScan load_scan(const std::string& prefix) {
    const nlohmann::json manifest = load_manifest(prefix);
    forward::SparseScan scan;
    scan.pattern.full_spec = spec_from_json(manifest);
    scan.pattern.stride_w = manifest.at("stride_w").get<std::size_t>();
    scan.pattern.pulses_per_pixel = manifest.at("pulses_per_pixel").get<std::size_t>();
    scan.pattern.pulses_full = manifest.at("pulses_full").get<std::size_t>();
    scan.noise.sigma_v = manifest.at("sigma_v").get<double>();
    scan.wavenumber_cm1 = manifest.at("wavenumber_cm1").get<double>();
    scan.data = read_f32(prefix + ".f32", scan.pattern.n_data());
    scan.validate();
    return scan;
}

nlohmann::json prior_config_to_json(const prior::PriorConfig& cfg) {
    return nlohmann::json{
        {"padded_n_rows", cfg.padded.n_rows},
        {"padded_m_cols", cfg.padded.m_cols},
        {"pixel_size_um", cfg.padded.pixel_size_um},
        {"scale_r", cfg.scale_r},
        {"s_mean", cfg.s_mean},
        {"s_std", cfg.s_std},
        {"a_log_mean", cfg.a_log_mean},
        {"a_log_std", cfg.a_log_std},
        {"b_log_mean", cfg.b_log_mean},
        {"b_log_std", cfg.b_log_std},
        {"c_log_mean", cfg.c_log_mean},
        {"c_log_std", cfg.c_log_std},
    };
}

prior::PriorConfig prior_config_from_json(const nlohmann::json& j) {
    prior::PriorConfig cfg;
    cfg.padded = GridSpec{j.at("padded_n_rows").get<std::size_t>(),
                          j.at("padded_m_cols").get<std::size_t>(),
                          j.at("pixel_size_um").get<double>()};
    cfg.scale_r = j.at("scale_r").get<double>();
    cfg.s_mean = j.at("s_mean").get<double>();
    cfg.s_std = j.at("s_std").get<double>();
    cfg.a_log_mean = j.at("a_log_mean").get<double>();
    cfg.a_log_std = j.at("a_log_std").get<double>();
    cfg.b_log_mean = j.at("b_log_mean").get<double>();
    cfg.b_log_std = j.at("b_log_std").get<double>();
    cfg.c_log_mean = j.at("c_log_mean").get<double>();
    cfg.c_log_std = j.at("c_log_std").get<double>();
    cfg.validate();
    return cfg;
}

namespace {

std::vector<double> latent_flat(const prior::LatentVector& lat) {
    std::vector<double> flat = lat.xi;
    flat.push_back(lat.a_lat);
    flat.push_back(lat.b_lat);
    flat.push_back(lat.c_lat);
    flat.push_back(lat.s_lat);
    return flat;
}

prior::LatentVector latent_unflat(const std::vector<double>& flat, std::size_t field_size) {
    if (flat.size() != field_size + 4) throw io_error("latent payload size mismatch");
    prior::LatentVector lat(field_size);
    std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(field_size),
              lat.xi.begin());
    lat.a_lat = flat[field_size];
    lat.b_lat = flat[field_size + 1];
    lat.c_lat = flat[field_size + 2];
    lat.s_lat = flat[field_size + 3];
    return lat;
}

}  // namespace

void save_ensemble(const std::string& prefix, const inference::PosteriorEnsemble& ens) {
    nlohmann::json manifest;
    manifest["prior"] = prior_config_to_json(ens.prior_cfg);
    manifest["n_rows"] = ens.pattern.full_spec.n_rows;
    manifest["m_cols"] = ens.pattern.full_spec.m_cols;
    manifest["pixel_size_um"] = ens.pattern.full_spec.pixel_size_um;
    manifest["stride_w"] = ens.pattern.stride_w;
    manifest["pulses_per_pixel"] = ens.pattern.pulses_per_pixel;
    manifest["pulses_full"] = ens.pattern.pulses_full;
    manifest["n_residuals"] = ens.residuals.size();
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& s : ens.stats)
        stats.push_back({{"kl_start", s.kl_start},
                         {"kl_end", s.kl_end},
                         {"cg_non_converged", s.cg_non_converged}});
    manifest["iterations"] = stats;
    save_json(prefix + ".json", manifest);

    std::vector<std::vector<double>> flats;
    flats.push_back(latent_flat(ens.mean));
    for (const auto& res : ens.residuals) flats.push_back(latent_flat(res));
    std::vector<const std::vector<double>*> blocks;
    blocks.reserve(flats.size());
    for (const auto& f : flats) blocks.push_back(&f);
    write_f32(prefix + ".f32", blocks);
}

inference::PosteriorEnsemble load_ensemble(const std::string& prefix) {
    const nlohmann::json manifest = load_manifest(prefix);
    inference::PosteriorEnsemble ens;
    ens.prior_cfg = prior_config_from_json(manifest.at("prior"));
    ens.pattern.full_spec = spec_from_json(manifest);
    ens.pattern.stride_w = manifest.at("stride_w").get<std::size_t>();
    ens.pattern.pulses_per_pixel = manifest.at("pulses_per_pixel").get<std::size_t>();
    ens.pattern.pulses_full = manifest.at("pulses_full").get<std::size_t>();

    const std::size_t field_size = ens.prior_cfg.padded.size();
    const std::size_t n_res = manifest.at("n_residuals").get<std::size_t>();
    const std::size_t stride = field_size + 4;
    const std::vector<double> all = read_f32(prefix + ".f32", stride * (n_res + 1));

    auto slice = [&](std::size_t idx) {
        return std::vector<double>(all.begin() + static_cast<std::ptrdiff_t>(idx * stride),
                                   all.begin() + static_cast<std::ptrdiff_t>((idx + 1) * stride));
    };
    ens.mean = latent_unflat(slice(0), field_size);
    for (std::size_t i = 0; i < n_res; ++i)
        ens.residuals.push_back(latent_unflat(slice(i + 1), field_size));
    for (const auto& it : manifest.at("iterations"))
        ens.stats.push_back({it.at("kl_start").get<double>(), it.at("kl_end").get<double>(),
                             it.at("cg_non_converged").get<std::size_t>()});
    return ens;
}

std::pair<std::vector<double>, std::vector<double>> load_endmember_txt(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path);
    std::vector<double> wavenumbers, values;
    double w = 0.0, v = 0.0;
    while (in >> w >> v) {
        wavenumbers.push_back(w);
        values.push_back(v);
    }
    if (wavenumbers.empty()) throw io_error("no spectrum rows in " + path);
    return {wavenumbers, values};
}

void save_endmember_txt(const std::string& path, const std::vector<double>& wavenumbers,
                        const std::vector<double>& values) {
    if (wavenumbers.size() != values.size())
        throw config_error("save_endmember_txt: length mismatch");
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < wavenumbers.size(); ++i)
        out << wavenumbers[i] << " " << values[i] << "\n";
}

namespace {

struct PngWriter {
    FILE* file = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter(const std::string& path, std::size_t width, std::size_t height, int bit_depth,
              int color_type) {
        file = std::fopen(path.c_str(), "wb");
        if (file == nullptr) throw io_error("cannot open for writing: " + path);
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info = png != nullptr ? png_create_info_struct(png) : nullptr;
        if (info == nullptr) {
            cleanup();
            throw io_error("libpng initialization failed");
        }
        if (setjmp(png_jmpbuf(png))) {
            cleanup();
            throw io_error("libpng write error: " + path);
        }
        png_init_io(png, file);
        png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                     static_cast<png_uint_32>(height), bit_depth, color_type,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
    }

    void rows(std::vector<png_bytep>& row_ptrs) {
        if (setjmp(png_jmpbuf(png))) {
            cleanup();
            throw io_error("libpng write error");
        }
        png_write_image(png, row_ptrs.data());
        png_write_end(png, nullptr);
    }

    void cleanup() {
        if (png != nullptr) png_destroy_write_struct(&png, info != nullptr ? &info : nullptr);
        if (file != nullptr) std::fclose(file);
        png = nullptr;
        info = nullptr;
        file = nullptr;
    }

    ~PngWriter() { cleanup(); }
};

void auto_range(const Image& img, double& lo, double& hi) {
    if (lo != hi) return;
    lo = hi = img.values[0];
    for (double v : img.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
}

double unit_scale(double v, double lo, double hi) {
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

// Single-hue deep-blue-to-white ramp.
void ice_rgb(double t, unsigned char rgb[3]) {
    rgb[0] = static_cast<unsigned char>(255.0 * t * t * 0.9 + 10.0 * t);
    rgb[1] = static_cast<unsigned char>(255.0 * std::pow(t, 1.3));
    rgb[2] = static_cast<unsigned char>(60.0 + 195.0 * std::pow(t, 0.7));
}

// Blue-white-red diverging map.
void diverging_rgb(double t, unsigned char rgb[3]) {
    const double u = 2.0 * t - 1.0;
    if (u < 0.0) {
        rgb[0] = static_cast<unsigned char>(255.0 * (1.0 + u));
        rgb[1] = static_cast<unsigned char>(255.0 * (1.0 + 0.75 * u));
        rgb[2] = 255;
    } else {
        rgb[0] = 255;
        rgb[1] = static_cast<unsigned char>(255.0 * (1.0 - 0.75 * u));
        rgb[2] = static_cast<unsigned char>(255.0 * (1.0 - u));
    }
}

}  // namespace

void write_png(const std::string& path, const Image& img, Colormap map, double lo, double hi) {
    auto_range(img, lo, hi);
    const std::size_t n = img.spec.n_rows, m = img.spec.m_cols;

    if (map == Colormap::gray) {
        std::vector<unsigned char> pixels(n * m);
        for (std::size_t i = 0; i < n * m; ++i)
            pixels[i] =
                static_cast<unsigned char>(255.0 * unit_scale(img.values[i], lo, hi) + 0.5);
        std::vector<png_bytep> rows(n);
        for (std::size_t r = 0; r < n; ++r) rows[r] = pixels.data() + r * m;
        PngWriter writer(path, m, n, 8, PNG_COLOR_TYPE_GRAY);
        writer.rows(rows);
        return;
    }

    std::vector<unsigned char> pixels(n * m * 3);
    for (std::size_t i = 0; i < n * m; ++i) {
        const double t = unit_scale(img.values[i], lo, hi);
        unsigned char rgb[3];
        if (map == Colormap::ice)
            ice_rgb(t, rgb);
        else
            diverging_rgb(t, rgb);
        pixels[3 * i] = rgb[0];
        pixels[3 * i + 1] = rgb[1];
        pixels[3 * i + 2] = rgb[2];
    }
    std::vector<png_bytep> rows(n);
    for (std::size_t r = 0; r < n; ++r) rows[r] = pixels.data() + r * m * 3;
    PngWriter writer(path, m, n, 8, PNG_COLOR_TYPE_RGB);
    writer.rows(rows);
}

void write_png_gray16(const std::string& path, const Image& img, double lo, double hi) {
    auto_range(img, lo, hi);
    const std::size_t n = img.spec.n_rows, m = img.spec.m_cols;
    std::vector<unsigned char> pixels(n * m * 2);
    for (std::size_t i = 0; i < n * m; ++i) {
        const auto v =
            static_cast<unsigned int>(65535.0 * unit_scale(img.values[i], lo, hi) + 0.5);
        pixels[2 * i] = static_cast<unsigned char>(v >> 8);  // PNG is big-endian
        pixels[2 * i + 1] = static_cast<unsigned char>(v & 0xFF);
    }
    std::vector<png_bytep> rows(n);
    for (std::size_t r = 0; r < n; ++r) rows[r] = pixels.data() + r * m * 2;
    PngWriter writer(path, m, n, 16, PNG_COLOR_TYPE_GRAY);
    writer.rows(rows);
}

void write_png_overlay(const std::string& path, const Image& a, const Image& b) {
    if (!a.spec.compatible(b.spec)) throw config_error("overlay: grid mismatch");
    double lo_a = 0.0, hi_a = 0.0, lo_b = 0.0, hi_b = 0.0;
    auto_range(a, lo_a, hi_a);
    auto_range(b, lo_b, hi_b);
    const std::size_t n = a.spec.n_rows, m = a.spec.m_cols;
    std::vector<unsigned char> pixels(n * m * 3);
    for (std::size_t i = 0; i < n * m; ++i) {
        const double ta = unit_scale(a.values[i], lo_a, hi_a);
        const double tb = unit_scale(b.values[i], lo_b, hi_b);
        pixels[3 * i] = static_cast<unsigned char>(255.0 * ta + 0.5);
        pixels[3 * i + 1] = static_cast<unsigned char>(255.0 * tb + 0.5);
        pixels[3 * i + 2] = static_cast<unsigned char>(255.0 * ta + 0.5);
    }
    std::vector<png_bytep> rows(n);
    for (std::size_t r = 0; r < n; ++r) rows[r] = pixels.data() + r * m * 3;
    PngWriter writer(path, m, n, 8, PNG_COLOR_TYPE_RGB);
    writer.rows(rows);
}

}  // namespace srm::io
