#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace spotlight::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,  // replay verification mismatch
    kInputError = 2,
    kGeometryError = 3,
    kDenoiserError = 4,
    kNumericalAbort = 5,
};

struct ShadowOptions {
    fs::path manifest;
    std::string mode;  // map | pixht | scribble
    fs::path out;
};

struct RenderOptions {
    std::optional<fs::path> manifest;
    std::optional<fs::path> replay;
    fs::path out;
    std::optional<int> steps;
    std::optional<double> gamma;
    std::optional<double> beta;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> negative;
    std::string denoiser = "toy";
    std::optional<std::string> sidecar_addr;
    double sidecar_timeout_s = 60.0;
    std::string prediction = "v";
    bool positive_only = false;
    bool no_blend = false;
};

struct EvalOptions {
    fs::path pred;
    fs::path ref;
    std::optional<fs::path> masks;
    std::vector<std::string> metrics{"psnr", "ssim", "rmse", "mae"};
    std::optional<fs::path> csv;
    std::optional<fs::path> markdown;
};

struct StudyOptions {
    fs::path votes;
    int bootstrap = 1000;
    std::uint64_t seed = 0;
    std::optional<fs::path> csv;
};

// Each command validates and computes everything before writing any file.
// Library errors propagate; run_cli maps them to exit codes.
int cmd_shadow(const ShadowOptions& opt, std::ostream& out, std::ostream& err);
int cmd_render(const RenderOptions& opt, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_study(const StudyOptions& opt, std::ostream& out, std::ostream& err);

// Parses arguments, dispatches, and converts exceptions into exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spotlight::cli
