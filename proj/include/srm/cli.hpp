#pragma once

#include <string>
#include <vector>

#include "srm/types.hpp"

namespace srm::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

struct PhantomArgs {
    std::string kind = "cells";
    std::size_t n_rows = 256, m_cols = 256;
    double pixel_um = 5.0;
    std::uint64_t seed = 0;
    double peak_v = 0.1;
    std::string out;
    // kind-specific knobs
    double corr_um = 40.0;
    double coverage = 0.5;
    double radius_min_um = 30.0, radius_max_um = 55.0;
    double rim_um = 10.0, gap_um = 12.0;
    double interior = 0.12, background = 0.30;
    bool zero_latent = false;
    std::vector<std::string> endmembers;  // name=path, two for spectral phantoms
};

struct ScanArgs {
    std::string truth;
    std::size_t stride = 4;
    std::size_t pulses = 15, pulses_full = 50;
    double sigma_v = 9.318e-7;
    double psf_um = 5.0;
    std::uint64_t seed = 0;
    std::string out;
};

struct ReconstructArgs {
    std::vector<std::string> scans;
    std::string preset = "full";
    std::size_t iterations = 0, samples = 0;  // 0 = take from preset
    double cg_tol = 1e-4;
    std::size_t cg_steps = 200, newton_steps = 10;
    std::uint64_t seed = 0;
    double psf_um = 5.0;
    double kappa = 1.5;
    std::size_t jobs = 1;
    std::string out;
};

struct EvaluateArgs {
    std::string rc;
    std::string gt;
    std::string std_prefix;
    std::string out = "report.json";
    std::string render_dir;
};

struct UnmixArgs {
    std::string cube;
    std::vector<std::string> endmembers;  // name=path
    std::string out;
};

struct ReportArgs {
    std::string kind = "cells";
    std::size_t n_rows = 256, m_cols = 256;
    double pixel_um = 5.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> strides = {2, 4, 8};
    std::size_t pulses = 15, pulses_full = 50;
    double sigma_v = 9.318e-7;
    double psf_um = 5.0;
    std::string preset = "approx";
    std::string out = "report_out";
};

int cmd_phantom(const PhantomArgs& args);
int cmd_scan(const ScanArgs& args);
int cmd_reconstruct(const ReconstructArgs& args);
int cmd_evaluate(const EvaluateArgs& args);
int cmd_unmix(const UnmixArgs& args);
int cmd_report(const ReportArgs& args);

// Full argv entry point: parses flags (with optional JSON config defaults),
// dispatches, and maps exceptions onto the exit codes above.
int run_cli(int argc, const char* const* argv);

}  // namespace srm::cli
