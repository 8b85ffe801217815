#include "srm/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "srm/analyze.hpp"
#include "srm/grid.hpp"
#include "srm/inference.hpp"
#include "srm/io.hpp"
#include "srm/simulate.hpp"

namespace srm::cli {

namespace {

using nlohmann::json;

std::pair<std::string, std::string> split_endmember_arg(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= arg.size())
        throw config_error("endmember argument must be name=path: " + arg);
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

analyze::EndmemberSet load_endmembers(const std::vector<std::string>& args,
                                      std::vector<double>* wavenumbers_out = nullptr) {
    analyze::EndmemberSet set;
    std::vector<double> wavenumbers;
    for (const std::string& arg : args) {
        auto [name, path] = split_endmember_arg(arg);
        auto [w, v] = io::load_endmember_txt(path);
        if (wavenumbers.empty())
            wavenumbers = w;
        else if (wavenumbers != w)
            throw config_error("endmember files disagree on wavenumbers");
        set.names.push_back(name);
        set.spectra.push_back(v);
    }
    set.validate();
    if (wavenumbers_out != nullptr) *wavenumbers_out = wavenumbers;
    return set;
}

std::string channel_prefix(const std::string& base, std::size_t channel, std::size_t total) {
    if (total == 1) return base;
    char buf[32];
    std::snprintf(buf, sizeof buf, "_ch%03u", static_cast<unsigned>(channel));
    return base + buf;
}

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int cmd_phantom(const PhantomArgs& args) {
    if (args.out.empty()) throw config_error("phantom: --out is required");
    GridSpec spec{args.n_rows, args.m_cols, args.pixel_um};
    Rng rng(args.seed);

    simulate::PhantomParams params;
    params.peak_v = args.peak_v;
    params.correlation_length_um = args.corr_um;
    params.grain_coverage = args.coverage;
    params.cell_radius_min_um = args.radius_min_um;
    params.cell_radius_max_um = args.radius_max_um;
    params.rim_width_um = args.rim_um;
    params.rim_gap_um = args.gap_um;
    params.interior_level = args.interior;
    params.background_level = args.background;
    params.draw_zero_latent = args.zero_latent;

    json extra{{"phantom_kind", args.kind}, {"seed", args.seed}, {"peak_v", args.peak_v}};

    if (!args.endmembers.empty()) {
        std::vector<double> wavenumbers;
        analyze::EndmemberSet set = load_endmembers(args.endmembers, &wavenumbers);
        if (set.names.size() != 2)
            throw config_error("spectral phantom: exactly two --endmember entries expected");
        simulate::Phantom ph = simulate::make_spectral_phantom(spec, rng, set.names,
                                                               set.spectra, wavenumbers, params);
        extra["endmembers"] = set.names;
        io::save_cube(args.out, ph.truth, extra);
        for (std::size_t j = 0; j < ph.weight_maps.size(); ++j)
            io::save_image(args.out + "_w_" + ph.endmember_names[j], ph.weight_maps[j]);
        return kExitOk;
    }

    simulate::Phantom ph =
        simulate::make_phantom(simulate::phantom_kind_from_string(args.kind), spec, rng, params);
    io::save_cube(args.out, ph.truth, extra);
    return kExitOk;
}

int cmd_scan(const ScanArgs& args) {
    if (args.truth.empty() || args.out.empty())
        throw config_error("scan: --truth and --out are required");
    const HyperCube truth = io::load_cube(args.truth);

    forward::ScanPattern pattern{truth.spec, args.stride, args.pulses, args.pulses_full};
    forward::ScanPattern full_pattern{truth.spec, 1, args.pulses_full, args.pulses_full};
    pattern.validate();

    const simulate::TimingModel tm = simulate::TimingModel::paper_calibrated();
    const double t_sparse = simulate::acquisition_time_s(pattern, tm);
    const double t_full = simulate::acquisition_time_s(full_pattern, tm);

    Rng rng(args.seed);
    forward::NoiseModel noise{args.sigma_v};
    for (std::size_t ch = 0; ch < truth.channels.size(); ++ch) {
        forward::SparseScan scan = simulate::acquire(truth.channels[ch], pattern, noise,
                                                     args.psf_um, &rng,
                                                     truth.wavenumbers_cm1[ch]);
        json extra{{"truth", args.truth},
                   {"seed", args.seed},
                   {"psf_sigma_um", args.psf_um},
                   {"sparsity", forward::sparsity_fraction(pattern)},
                   {"acquisition_time_s", t_sparse},
                   {"full_scan_time_s", t_full},
                   {"speedup", simulate::speedup(t_full, t_sparse)}};
        io::save_scan(channel_prefix(args.out, ch, truth.channels.size()), scan, extra);
    }
    return kExitOk;
}

namespace {

struct ChannelResult {
    Image mean;
    Image std_img;
    double mrsd = 0.0;
    double wall_s = 0.0;
    double wavenumber = 0.0;
    double scale_r = 0.0;
    json iterations;
};

ChannelResult reconstruct_channel(const forward::SparseScan& scan,
                                  const ReconstructArgs& args,
                                  const inference::MGVIConfig& mgvi,
                                  const std::string& ensemble_prefix) {
    const auto t0 = std::chrono::steady_clock::now();

    const GridSpec padded = inference::padded_spec_for(scan.pattern.full_spec, args.psf_um);
    const double r = prior::choose_scale_r(scan.data, scan.noise.sigma_v, args.kappa);
    const prior::PriorConfig prior_cfg = prior::PriorConfig::defaults_for(padded, r);

    inference::PosteriorEnsemble ens = inference::run_mgvi(scan, prior_cfg, mgvi, args.psf_um);

    ChannelResult res;
    res.mean = inference::posterior_mean_image(ens);
    res.std_img = inference::posterior_std_image(ens);
    res.mrsd = analyze::mrsd(res.mean, res.std_img);
    res.wall_s = wall_seconds(t0);
    res.wavenumber = scan.wavenumber_cm1;
    res.scale_r = r;
    res.iterations = json::array();
    for (const auto& s : ens.stats)
        res.iterations.push_back({{"kl_start", s.kl_start},
                                  {"kl_end", s.kl_end},
                                  {"cg_non_converged", s.cg_non_converged}});
    io::save_ensemble(ensemble_prefix, ens);
    return res;
}

}  // namespace

int cmd_reconstruct(const ReconstructArgs& args) {
    if (args.scans.empty() || args.out.empty())
        throw config_error("reconstruct: --scan and --out are required");

    inference::MGVIConfig mgvi;
    if (args.preset == "full")
        mgvi = inference::MGVIConfig::preset_full(args.seed);
    else if (args.preset == "approx")
        mgvi = inference::MGVIConfig::preset_approx(args.seed);
    else
        throw config_error("reconstruct: unknown preset " + args.preset);
    if (args.iterations > 0) mgvi.n_iterations = args.iterations;
    if (args.samples > 0) mgvi.n_samples = args.samples;
    mgvi.cg_tolerance = args.cg_tol;
    mgvi.cg_max_steps = args.cg_steps;
    mgvi.newton_steps = args.newton_steps;
    mgvi.validate();

    std::vector<forward::SparseScan> scans;
    scans.reserve(args.scans.size());
    for (const std::string& prefix : args.scans) scans.push_back(io::load_scan(prefix));
    for (std::size_t ch = 1; ch < scans.size(); ++ch)
        if (!scans[ch].pattern.full_spec.compatible(scans[0].pattern.full_spec))
            throw config_error("reconstruct: scans live on different grids");

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<ChannelResult> results(scans.size());
    std::exception_ptr failure;

    // Channels are independent runs; each gets its own seed offset so the
    // output is identical for any --jobs value.
    const std::size_t jobs = std::max<std::size_t>(1, args.jobs);
    std::size_t next = 0;
    std::mutex mtx;
    auto worker = [&]() {
        for (;;) {
            std::size_t ch;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= scans.size() || failure) return;
                ch = next++;
            }
            try {
                inference::MGVIConfig cfg = mgvi;
                cfg.rng_seed = mgvi.rng_seed + ch;
                results[ch] = reconstruct_channel(
                    scans[ch], args, cfg,
                    channel_prefix(args.out + "_ensemble", ch, scans.size()));
            } catch (...) {
                std::lock_guard<std::mutex> lock(mtx);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (jobs == 1 || scans.size() == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < std::min(jobs, scans.size()); ++t)
            threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    HyperCube mean_cube, std_cube;
    mean_cube.spec = std_cube.spec = scans[0].pattern.full_spec;
    json channels = json::array();
    for (const ChannelResult& res : results) {
        mean_cube.wavenumbers_cm1.push_back(res.wavenumber);
        std_cube.wavenumbers_cm1.push_back(res.wavenumber);
        mean_cube.channels.push_back(res.mean);
        std_cube.channels.push_back(res.std_img);
        channels.push_back({{"wavenumber_cm1", res.wavenumber},
                            {"mrsd", res.mrsd},
                            {"scale_r", res.scale_r},
                            {"wall_clock_s", res.wall_s},
                            {"iterations", res.iterations}});
    }
    // Duplicate placeholder wavenumbers would fail cube validation.
    if (mean_cube.channels.size() == 1) {
        mean_cube.wavenumbers_cm1 = {results[0].wavenumber};
        std_cube.wavenumbers_cm1 = {results[0].wavenumber};
    }
    io::save_cube(args.out + "_mean", mean_cube);
    io::save_cube(args.out + "_std", std_cube);

    json manifest{{"preset", args.preset},
                  {"n_iterations", mgvi.n_iterations},
                  {"n_samples", mgvi.n_samples},
                  {"cg_tolerance", mgvi.cg_tolerance},
                  {"cg_max_steps", mgvi.cg_max_steps},
                  {"newton_steps", mgvi.newton_steps},
                  {"seed", args.seed},
                  {"psf_sigma_um", args.psf_um},
                  {"wall_clock_s", wall_seconds(t0)},
                  {"channels", channels}};
    io::save_json(args.out + ".json", manifest);
    return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& args) {
    if (args.rc.empty() || args.gt.empty())
        throw config_error("evaluate: --rc and --gt are required");
    const HyperCube rc = io::load_cube(args.rc);
    const HyperCube gt = io::load_cube(args.gt);
    if (rc.channels.size() != gt.channels.size())
        throw config_error("evaluate: channel count mismatch");

    HyperCube std_cube;
    const bool have_std = !args.std_prefix.empty();
    if (have_std) {
        std_cube = io::load_cube(args.std_prefix);
        if (std_cube.channels.size() != rc.channels.size())
            throw config_error("evaluate: std channel count mismatch");
    }

    analyze::MetricsReport report;
    json channels = json::array();
    for (std::size_t ch = 0; ch < rc.channels.size(); ++ch) {
        analyze::ChannelMetrics met;
        met.wavenumber_cm1 = gt.wavenumbers_cm1[ch];
        const Image aligned = grid::resample_bilinear(rc.channels[ch], gt.spec);
        met.ssim = analyze::ssim(aligned, gt.channels[ch]);
        met.error_map = analyze::error_map(aligned, gt.channels[ch]);
        met.mae = sum(met.error_map.values) / static_cast<double>(met.error_map.values.size());
        met.max_abs_error = max_abs(met.error_map.values);
        if (have_std) {
            const Image std_aligned = grid::resample_bilinear(std_cube.channels[ch], gt.spec);
            met.mrsd = analyze::mrsd(aligned, std_aligned);
            met.rsd_histogram = analyze::rsd_histogram(aligned, std_aligned);
        }
        json entry{{"wavenumber_cm1", met.wavenumber_cm1},
                   {"ssim", met.ssim},
                   {"mae_v", met.mae},
                   {"max_abs_error_v", met.max_abs_error}};
        if (have_std) {
            entry["mrsd"] = met.mrsd;
            entry["rsd_histogram"] = {{"edges", met.rsd_histogram.edges},
                                      {"counts", met.rsd_histogram.counts}};
        }
        channels.push_back(entry);
        report.mean_ssim += met.ssim;
        report.mean_mae += met.mae;
        report.channels.push_back(std::move(met));
    }
    report.mean_ssim /= static_cast<double>(report.channels.size());
    report.mean_mae /= static_cast<double>(report.channels.size());

    json out{{"rc", args.rc},
             {"gt", args.gt},
             {"mean_ssim", report.mean_ssim},
             {"mean_mae_v", report.mean_mae},
             {"channels", channels}};
    io::save_json(args.out, out);

    if (!args.render_dir.empty()) {
        std::filesystem::create_directories(args.render_dir);
        const std::string base = args.render_dir + "/";
        for (std::size_t ch = 0; ch < report.channels.size(); ++ch) {
            const std::string suffix = channel_prefix("", ch, report.channels.size());
            const Image aligned = grid::resample_bilinear(rc.channels[ch], gt.spec);
            io::write_png(base + "mean" + suffix + ".png", aligned, io::Colormap::ice);
            io::write_png(base + "gt" + suffix + ".png", gt.channels[ch], io::Colormap::ice);
            io::write_png(base + "error" + suffix + ".png", report.channels[ch].error_map,
                          io::Colormap::diverging);
            io::write_png_overlay(base + "overlay" + suffix + ".png", aligned,
                                  gt.channels[ch]);
        }
    }
    return kExitOk;
}

int cmd_unmix(const UnmixArgs& args) {
    if (args.cube.empty() || args.out.empty())
        throw config_error("unmix: --cube and --out are required");
    const HyperCube cube = io::load_cube(args.cube);
    std::vector<double> wavenumbers;
    analyze::EndmemberSet set = load_endmembers(args.endmembers, &wavenumbers);
    if (wavenumbers.size() != cube.channels.size())
        throw config_error("unmix: endmember spectra do not match cube channels");

    const analyze::CubeUnmixResult result = analyze::unmix_cube(cube, set);
    json composition = json::object();
    for (std::size_t j = 0; j < set.names.size(); ++j) {
        io::save_image(args.out + "_coeff_" + set.names[j], result.coefficient_maps[j]);
        composition[set.names[j]] = result.composition[j];
    }
    io::save_json(args.out + ".json", json{{"cube", args.cube},
                                           {"composition", composition},
                                           {"degenerate_pixels", result.degenerate_pixels}});
    return kExitOk;
}

int cmd_report(const ReportArgs& args) {
    std::filesystem::create_directories(args.out);
    const std::string base = args.out + "/";

    PhantomArgs phantom;
    phantom.kind = args.kind;
    phantom.n_rows = args.n_rows;
    phantom.m_cols = args.m_cols;
    phantom.pixel_um = args.pixel_um;
    phantom.seed = args.seed;
    phantom.out = base + "truth";
    cmd_phantom(phantom);

    const HyperCube truth = io::load_cube(base + "truth");
    const Image& truth_img = truth.channels.front();

    // Ground-truth reference: the image a noiseless full raster scan would
    // deliver (PSF included).
    forward::ScanPattern full_pattern{truth.spec, 1, args.pulses_full, args.pulses_full};
    const std::vector<double> full_data =
        forward::forward_apply(truth_img, full_pattern, args.psf_um);
    Image gt = forward::apply_stages_adjoint(full_data, full_pattern);
    io::save_image(base + "gt", gt);
    io::write_png(base + "gt.png", gt, io::Colormap::ice);

    const simulate::TimingModel tm = simulate::TimingModel::paper_calibrated();
    const double t_full = simulate::acquisition_time_s(full_pattern, tm);

    std::vector<std::size_t> strides = args.strides;
    std::sort(strides.begin(), strides.end());
    json rows = json::array();
    for (const std::size_t stride : strides) {
        const std::string tag = "_w" + std::to_string(stride);

        ScanArgs scan_args;
        scan_args.truth = base + "truth";
        scan_args.stride = stride;
        scan_args.pulses = args.pulses;
        scan_args.pulses_full = args.pulses_full;
        scan_args.sigma_v = args.sigma_v;
        scan_args.psf_um = args.psf_um;
        scan_args.seed = args.seed + stride;
        scan_args.out = base + "scan" + tag;
        cmd_scan(scan_args);

        ReconstructArgs rec_args;
        rec_args.scans = {base + "scan" + tag};
        rec_args.preset = args.preset;
        rec_args.seed = args.seed;
        rec_args.psf_um = args.psf_um;
        rec_args.out = base + "rc" + tag;
        cmd_reconstruct(rec_args);

        const forward::SparseScan scan = io::load_scan(base + "scan" + tag);
        const Image mean = io::load_image(base + "rc" + tag + "_mean");
        const Image std_img = io::load_image(base + "rc" + tag + "_std");
        const Image err = analyze::error_map(mean, gt);

        io::write_png(base + "backprojection" + tag + ".png",
                      analyze::backprojection_display(scan), io::Colormap::gray);
        io::write_png(base + "mean" + tag + ".png", mean, io::Colormap::ice);
        // Display-only contrast stretch; metrics always use the raw values.
        io::write_png(base + "mean_clahe" + tag + ".png", analyze::clahe(mean),
                      io::Colormap::gray);
        io::write_png(base + "std" + tag + ".png", std_img, io::Colormap::gray);
        io::write_png(base + "error" + tag + ".png", err, io::Colormap::diverging);
        io::write_png_overlay(base + "overlay" + tag + ".png", mean, gt);

        const double t_sparse = simulate::acquisition_time_s(scan.pattern, tm);
        rows.push_back({{"stride_w", stride},
                        {"sparsity", forward::sparsity_fraction(scan.pattern)},
                        {"speedup", simulate::speedup(t_full, t_sparse)},
                        {"ssim", analyze::ssim(mean, gt)},
                        {"mrsd", analyze::mrsd(mean, std_img)},
                        {"mae_v", analyze::mae(mean, gt)},
                        {"max_error_v", max_abs(err.values)}});
    }
    io::save_json(base + "table.json",
                  json{{"phantom", args.kind}, {"seed", args.seed}, {"rows", rows}});

    std::cout << "stride  sparsity  speedup  ssim    mrsd    mae_v        max_error_v\n";
    for (const auto& row : rows) {
        std::printf("%-7zu %-9.4f %-8.2f %-7.4f %-7.4f %-12.6g %-12.6g\n",
                    row.at("stride_w").get<std::size_t>(), row.at("sparsity").get<double>(),
                    row.at("speedup").get<double>(), row.at("ssim").get<double>(),
                    row.at("mrsd").get<double>(), row.at("mae_v").get<double>(),
                    row.at("max_error_v").get<double>());
    }
    return kExitOk;
}

namespace {

// JSON config files mirror the long flag names; flags given on the command
// line win. Unknown keys are rejected.
void apply_config_defaults(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    const json cfg = io::read_json(config_path);
    if (!cfg.is_object()) throw config_error("config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) throw config_error("unknown config key: " + key);
        if (opt->count() > 0) continue;  // explicit flag wins
        std::vector<std::string> items;
        if (value.is_array()) {
            for (const auto& v : value)
                items.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        } else {
            items.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
        for (const std::string& item : items) opt->add_result(item);
        opt->run_callback();
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"sparse raster-scan microscopy reconstruction"};
    app.require_subcommand(1);

    PhantomArgs phantom;
    ScanArgs scan;
    ReconstructArgs reconstruct;
    EvaluateArgs evaluate;
    UnmixArgs unmix;
    ReportArgs report;
    std::string config_path;

    CLI::App* p = app.add_subcommand("phantom", "generate a synthetic ground-truth field");
    p->add_option("--kind", phantom.kind)->check(CLI::IsMember({"grain", "cells", "prior-draw"}));
    p->add_option("--n", phantom.n_rows);
    p->add_option("--m", phantom.m_cols);
    p->add_option("--pixel-um", phantom.pixel_um);
    p->add_option("--seed", phantom.seed);
    p->add_option("--peak-v", phantom.peak_v);
    p->add_option("--out", phantom.out);
    p->add_option("--corr-um", phantom.corr_um);
    p->add_option("--coverage", phantom.coverage);
    p->add_option("--radius-min-um", phantom.radius_min_um);
    p->add_option("--radius-max-um", phantom.radius_max_um);
    p->add_option("--rim-um", phantom.rim_um);
    p->add_option("--gap-um", phantom.gap_um);
    p->add_option("--interior", phantom.interior);
    p->add_option("--background", phantom.background);
    p->add_flag("--zero-latent", phantom.zero_latent);
    p->add_option("--endmember", phantom.endmembers, "name=path, twice for spectral phantoms");

    CLI::App* s = app.add_subcommand("scan", "acquire a sparse scan from a truth grid");
    s->add_option("--truth", scan.truth);
    s->add_option("--stride", scan.stride);
    s->add_option("--pulses", scan.pulses);
    s->add_option("--pulses-full", scan.pulses_full);
    s->add_option("--sigma", scan.sigma_v);
    s->add_option("--psf-um", scan.psf_um);
    s->add_option("--seed", scan.seed);
    s->add_option("--out", scan.out);

    CLI::App* r = app.add_subcommand("reconstruct", "posterior reconstruction of sparse scans");
    r->add_option("--scan", reconstruct.scans, "scan bundle prefix, repeatable per channel");
    r->add_option("--preset", reconstruct.preset)->check(CLI::IsMember({"full", "approx"}));
    r->add_option("--iterations", reconstruct.iterations);
    r->add_option("--samples", reconstruct.samples);
    r->add_option("--cg-tol", reconstruct.cg_tol);
    r->add_option("--cg-steps", reconstruct.cg_steps);
    r->add_option("--newton-steps", reconstruct.newton_steps);
    r->add_option("--seed", reconstruct.seed);
    r->add_option("--psf-um", reconstruct.psf_um);
    r->add_option("--kappa", reconstruct.kappa);
    r->add_option("--jobs", reconstruct.jobs);
    r->add_option("--out", reconstruct.out);

    CLI::App* e = app.add_subcommand("evaluate", "metrics of a reconstruction vs ground truth");
    e->add_option("--rc", evaluate.rc);
    e->add_option("--gt", evaluate.gt);
    e->add_option("--std", evaluate.std_prefix);
    e->add_option("--out", evaluate.out);
    e->add_option("--render-dir", evaluate.render_dir);

    CLI::App* u = app.add_subcommand("unmix", "pixel-wise non-negative spectral unmixing");
    u->add_option("--cube", unmix.cube);
    u->add_option("--endmember", unmix.endmembers, "name=path, at least twice");
    u->add_option("--out", unmix.out);

    CLI::App* t = app.add_subcommand("report", "sparsity sweep with table and renders");
    t->add_option("--kind", report.kind)->check(CLI::IsMember({"grain", "cells", "prior-draw"}));
    t->add_option("--n", report.n_rows);
    t->add_option("--m", report.m_cols);
    t->add_option("--pixel-um", report.pixel_um);
    t->add_option("--seed", report.seed);
    t->add_option("--strides", report.strides);
    t->add_option("--pulses", report.pulses);
    t->add_option("--pulses-full", report.pulses_full);
    t->add_option("--sigma", report.sigma_v);
    t->add_option("--psf-um", report.psf_um);
    t->add_option("--preset", report.preset)->check(CLI::IsMember({"full", "approx"}));
    t->add_option("--out", report.out);

    for (CLI::App* cmd : {p, s, r, e, u, t})
        cmd->add_option("--config", config_path, "JSON file with flag defaults");

    try {
        app.parse(argc, argv);
        CLI::App* active = app.get_subcommands().front();
        apply_config_defaults(active, config_path);

        if (active == p) return cmd_phantom(phantom);
        if (active == s) return cmd_scan(scan);
        if (active == r) return cmd_reconstruct(reconstruct);
        if (active == e) return cmd_evaluate(evaluate);
        if (active == u) return cmd_unmix(unmix);
        return cmd_report(report);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const config_error& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const numerical_error& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return kExitNumerical;
    } catch (const io_error& err) {
        std::cerr << "io error: " << err.what() << "\n";
        return kExitIo;
    }
}

}  // namespace srm::cli
