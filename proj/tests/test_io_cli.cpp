#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "srm/cli.hpp"
#include "srm/io.hpp"
#include "srm/rng.hpp"

using namespace srm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("srm_test_" + std::to_string(Rng(::time(nullptr)).next_u64() % 1000000));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Values that survive the float32 round trip exactly.
double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"srm"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("image and cube round-trip through the grid bundle format") {
    TempDir dir;
    Rng rng(81);

    HyperCube cube;
    cube.spec = GridSpec{6, 5, 2.5};
    cube.wavenumbers_cm1 = {2856.0, 1550.0};
    for (int ch = 0; ch < 2; ++ch) {
        Image img(cube.spec);
        for (double& v : img.values) v = f32(rng.normal());
        cube.channels.push_back(img);
    }
    io::save_cube(dir / "cube", cube);
    const HyperCube back = io::load_cube(dir / "cube");
    CHECK(back.spec.compatible(cube.spec));
    CHECK(back.wavenumbers_cm1 == cube.wavenumbers_cm1);
    for (int ch = 0; ch < 2; ++ch) CHECK(back.channels[ch].values == cube.channels[ch].values);

    Image img(GridSpec{3, 4, 5.0});
    for (double& v : img.values) v = f32(rng.normal());
    io::save_image(dir / "img", img);
    CHECK(io::load_image(dir / "img").values == img.values);
}

TEST_CASE("scan bundles round-trip with their manifests") {
    TempDir dir;
    Rng rng(82);
    forward::SparseScan scan;
    scan.pattern = {GridSpec{8, 8, 5.0}, 4, 15, 50};
    scan.noise.sigma_v = 9.318e-7;
    scan.wavenumber_cm1 = 2856.0;
    scan.data.resize(scan.pattern.n_data());
    for (double& v : scan.data) v = f32(rng.normal());

    io::save_scan(dir / "scan", scan, {{"sparsity", 0.925}});
    const forward::SparseScan back = io::load_scan(dir / "scan");
    CHECK(back.pattern.stride_w == 4);
    CHECK(back.pattern.pulses_per_pixel == 15);
    CHECK(back.noise.sigma_v == doctest::Approx(9.318e-7));
    CHECK(back.wavenumber_cm1 == 2856.0);
    CHECK(back.data == scan.data);
    CHECK(io::load_manifest(dir / "scan").at("sparsity").get<double>() == doctest::Approx(0.925));
}

TEST_CASE("ensemble checkpoints round-trip") {
    TempDir dir;
    Rng rng(83);
    inference::PosteriorEnsemble ens;
    ens.prior_cfg = prior::PriorConfig::defaults_for(GridSpec{10, 10, 5.0}, 0.15);
    ens.pattern = {GridSpec{6, 6, 5.0}, 2, 15, 50};
    ens.mean = prior::random_latent(100, rng);
    for (double& v : ens.mean.xi) v = f32(v);
    ens.mean.a_lat = f32(ens.mean.a_lat);
    ens.mean.b_lat = f32(ens.mean.b_lat);
    ens.mean.c_lat = f32(ens.mean.c_lat);
    ens.mean.s_lat = f32(ens.mean.s_lat);
    for (int i = 0; i < 2; ++i) {
        prior::LatentVector res = prior::random_latent(100, rng);
        for (double& v : res.xi) v = f32(v);
        res.a_lat = f32(res.a_lat);
        res.b_lat = f32(res.b_lat);
        res.c_lat = f32(res.c_lat);
        res.s_lat = f32(res.s_lat);
        ens.residuals.push_back(res);
        ens.residuals.push_back(-res);
    }
    ens.stats.push_back({12.5, 3.25, 1});

    io::save_ensemble(dir / "ens", ens);
    const inference::PosteriorEnsemble back = io::load_ensemble(dir / "ens");
    CHECK(prior::norm(back.mean - ens.mean) == 0.0);
    REQUIRE(back.residuals.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(prior::norm(back.residuals[i] - ens.residuals[i]) == 0.0);
    CHECK(back.prior_cfg.scale_r == doctest::Approx(0.15));
    REQUIRE(back.stats.size() == 1);
    CHECK(back.stats[0].kl_start == 12.5);
    CHECK(back.stats[0].cg_non_converged == 1);
}

TEST_CASE("endmember text files round-trip") {
    TempDir dir;
    io::save_endmember_txt(dir / "at.txt", {2856.0, 1550.0}, {1.0, 0.25});
    const auto [w, v] = io::load_endmember_txt(dir / "at.txt");
    CHECK(w == std::vector<double>{2856.0, 1550.0});
    CHECK(v == std::vector<double>{1.0, 0.25});
    CHECK_THROWS_AS(io::load_endmember_txt(dir / "missing.txt"), io_error);
}

TEST_CASE("png renders are written") {
    TempDir dir;
    Rng rng(84);
    Image img(GridSpec{24, 30, 5.0});
    for (double& v : img.values) v = rng.uniform();
    io::write_png(dir / "gray.png", img, io::Colormap::gray);
    io::write_png(dir / "ice.png", img, io::Colormap::ice);
    io::write_png(dir / "div.png", img, io::Colormap::diverging);
    io::write_png_gray16(dir / "gray16.png", img);
    io::write_png_overlay(dir / "overlay.png", img, img);
    for (const char* name : {"gray.png", "ice.png", "div.png", "gray16.png", "overlay.png"}) {
        CHECK(fs::exists(dir / name));
        CHECK(fs::file_size(dir / name) > 64);
    }
}

TEST_CASE("cli pipeline: phantom, scan, reconstruct, evaluate, unmix") {
    TempDir dir;

    CHECK(run({"phantom", "--kind", "cells", "--n", "24", "--m", "24", "--pixel-um", "5",
               "--seed", "7", "--out", dir / "truth"}) == 0);
    CHECK(fs::exists(dir / "truth.f32"));

    SUBCASE("phantom is deterministic") {
        CHECK(run({"phantom", "--kind", "cells", "--n", "24", "--m", "24", "--pixel-um", "5",
                   "--seed", "7", "--out", dir / "truth2"}) == 0);
        CHECK(slurp(dir / "truth.f32") == slurp(dir / "truth2.f32"));
    }

    CHECK(run({"scan", "--truth", dir / "truth", "--stride", "4", "--pulses", "15", "--seed",
               "3", "--out", dir / "scan"}) == 0);
    const auto scan_manifest = io::load_manifest(dir / "scan");
    CHECK(scan_manifest.at("sparsity").get<double>() == doctest::Approx(0.925));
    CHECK(scan_manifest.at("speedup").get<double>() > 1.0);

    CHECK(run({"reconstruct", "--scan", dir / "scan", "--preset", "approx", "--iterations",
               "2", "--samples", "4", "--newton-steps", "4", "--cg-steps", "60", "--seed",
               "1", "--out", dir / "rc"}) == 0);
    CHECK(fs::exists(dir / "rc_mean.f32"));
    CHECK(fs::exists(dir / "rc_std.f32"));
    const auto rc_manifest = io::load_manifest(dir / "rc");
    CHECK(rc_manifest.at("channels").size() == 1);
    CHECK(rc_manifest.at("channels")[0].contains("mrsd"));

    SUBCASE("reconstruction is bit-identical across runs") {
        CHECK(run({"reconstruct", "--scan", dir / "scan", "--preset", "approx",
                   "--iterations", "2", "--samples", "4", "--newton-steps", "4",
                   "--cg-steps", "60", "--seed", "1", "--out", dir / "rc2"}) == 0);
        CHECK(slurp(dir / "rc_mean.f32") == slurp(dir / "rc2_mean.f32"));
        CHECK(slurp(dir / "rc_std.f32") == slurp(dir / "rc2_std.f32"));
    }

    CHECK(run({"evaluate", "--rc", dir / "rc_mean", "--gt", dir / "truth", "--std",
               dir / "rc_std", "--out", dir / "report.json", "--render-dir",
               dir / "renders"}) == 0);
    const auto report = io::read_json(dir / "report.json");
    CHECK(report.at("mean_ssim").get<double>() > -1.0);
    CHECK(fs::exists(dir / "renders/overlay.png"));

    SUBCASE("evaluate of a grid against itself is perfect") {
        CHECK(run({"evaluate", "--rc", dir / "truth", "--gt", dir / "truth", "--out",
                   dir / "self.json"}) == 0);
        const auto self = io::read_json(dir / "self.json");
        CHECK(self.at("mean_ssim").get<double>() == doctest::Approx(1.0));
        CHECK(self.at("mean_mae_v").get<double>() == 0.0);
    }

    SUBCASE("unmix recovers exact mixtures") {
        io::save_endmember_txt(dir / "at.txt", {2856.0, 1550.0}, {1.0, 0.2});
        io::save_endmember_txt(dir / "ecm.txt", {2856.0, 1550.0}, {0.1, 0.9});
        CHECK(run({"phantom", "--kind", "cells", "--n", "16", "--m", "16", "--seed", "9",
                   "--endmember", "AT=" + (dir / "at.txt"),
                   "--endmember", "ECM=" + (dir / "ecm.txt"),
                   "--out", dir / "cube"}) == 0);
        CHECK(run({"unmix", "--cube", dir / "cube",
                   "--endmember", "AT=" + (dir / "at.txt"),
                   "--endmember", "ECM=" + (dir / "ecm.txt"),
                   "--out", dir / "unmix"}) == 0);
        const auto unmix = io::read_json(dir / "unmix.json");
        const double at = unmix.at("composition").at("AT").get<double>();
        const double ecm = unmix.at("composition").at("ECM").get<double>();
        CHECK(at + ecm == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(at > 0.0);
        CHECK(ecm > 0.0);
    }
}

TEST_CASE("multichannel reconstruction is identical for any --jobs value") {
    TempDir dir;
    io::save_endmember_txt(dir / "at.txt", {2856.0, 1550.0}, {1.0, 0.2});
    io::save_endmember_txt(dir / "ecm.txt", {2856.0, 1550.0}, {0.1, 0.9});
    REQUIRE(run({"phantom", "--kind", "cells", "--n", "16", "--m", "16", "--seed", "9",
                 "--endmember", "AT=" + (dir / "at.txt"),
                 "--endmember", "ECM=" + (dir / "ecm.txt"),
                 "--out", dir / "cube"}) == 0);
    REQUIRE(run({"scan", "--truth", dir / "cube", "--stride", "2", "--seed", "4", "--out",
                 dir / "scan"}) == 0);
    for (const char* jobs : {"1", "2"}) {
        REQUIRE(run({"reconstruct", "--scan", dir / "scan_ch000", "--scan", dir / "scan_ch001",
                     "--preset", "approx", "--iterations", "2", "--samples", "4",
                     "--newton-steps", "3", "--cg-steps", "50", "--seed", "8", "--jobs", jobs,
                     "--out", dir / ("rc_j" + std::string(jobs))}) == 0);
    }
    CHECK(slurp(dir / "rc_j1_mean.f32") == slurp(dir / "rc_j2_mean.f32"));
    CHECK(slurp(dir / "rc_j1_std.f32") == slurp(dir / "rc_j2_std.f32"));
}

TEST_CASE("cli report runs a small sweep end to end") {
    TempDir dir;
    CHECK(run({"report", "--kind", "cells", "--n", "32", "--m", "32", "--seed", "5",
               "--strides", "2", "--strides", "4", "--preset", "approx", "--out",
               dir / "sweep"}) == 0);
    const auto table = io::read_json(dir / "sweep/table.json");
    REQUIRE(table.at("rows").size() == 2);
    CHECK(table.at("rows")[0].at("sparsity").get<double>() <
          table.at("rows")[1].at("sparsity").get<double>());
    for (const char* name :
         {"backprojection_w4.png", "mean_w4.png", "mean_clahe_w4.png", "std_w4.png",
          "error_w4.png", "overlay_w4.png", "gt.png"})
        CHECK(fs::exists(dir / ("sweep/" + std::string(name))));
}

TEST_CASE("cli config files provide defaults and reject unknown keys") {
    TempDir dir;

    io::save_json(dir / "good.json", {{"kind", "cells"}, {"n", 16}, {"m", 16}, {"seed", 5}});
    CHECK(run({"phantom", "--config", dir / "good.json", "--out", dir / "a"}) == 0);

    // The flag wins over the config value.
    CHECK(run({"phantom", "--config", dir / "good.json", "--seed", "6", "--out",
               dir / "b"}) == 0);
    CHECK(run({"phantom", "--kind", "cells", "--n", "16", "--m", "16", "--seed", "6",
               "--out", dir / "c"}) == 0);
    CHECK(slurp(dir / "b.f32") == slurp(dir / "c.f32"));
    CHECK(slurp(dir / "a.f32") != slurp(dir / "b.f32"));

    io::save_json(dir / "bad.json", {{"no_such_key", 1}});
    CHECK(run({"phantom", "--config", dir / "bad.json", "--out", dir / "d"}) ==
          cli::kExitConfig);
}

TEST_CASE("cli exit codes") {
    TempDir dir;
    CHECK(run({"phantom"}) == cli::kExitConfig);  // --out missing
    CHECK(run({"scan", "--truth", dir / "missing", "--out", dir / "x"}) == cli::kExitIo);
    CHECK(run({"no-such-command"}) == cli::kExitConfig);
}
