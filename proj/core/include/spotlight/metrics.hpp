#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spotlight/image.hpp"

namespace spotlight {

// ----------------------------------------------------------------------------
// Reference-based image metrics
// ----------------------------------------------------------------------------

enum class MetricRegion { full, masked };

struct MetricReport {
    double psnr = 0.0;  // dB, capped at kPsnrCap
    double ssim = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    MetricRegion region = MetricRegion::full;
};

inline constexpr double kPsnrCap = 100.0;

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

// Inputs are clamped to [0,1] first. MAE/RMSE/PSNR run over every channel of
// the selected pixels (mask >= 0.5); SSIM averages the per-channel SSIM map
// over windows fully inside the image whose center is selected.
MetricReport pixel_metrics(const PixelMap& a, const PixelMap& b, const MaskMap* mask = nullptr,
                           const SsimOptions& ssim = {});

double psnr_from_rmse(double rmse) noexcept;

// ----------------------------------------------------------------------------
// Paired-comparison scaling
// ----------------------------------------------------------------------------

struct Vote {
    std::string observer;
    int left = 0;
    int right = 0;
    bool left_won = true;
};

/// counts[i][j]: number of times method i was preferred over method j.
struct PreferenceMatrix {
    int n_methods = 0;
    std::vector<std::vector<std::uint64_t>> counts;
    int observers = 0;

    static PreferenceMatrix from_votes(int n_methods, const std::vector<Vote>& votes);
    std::uint64_t presentations(int i, int j) const { return counts[i][j] + counts[j][i]; }
};

struct ThurstoneResult {
    std::vector<double> z;
    // Present only when a bootstrap ran.
    std::optional<std::vector<double>> ci_low;
    std::optional<std::vector<double>> ci_high;
    int bootstrap_replicates = 0;
};

// Standard normal quantile.
double probit(double p);

// Case V scale values: z_i = (1/n)·Σ_j Φ⁻¹(p_ij) with p_ii = 0.5, where the
// proportions are clipped to [1/(2N), 1 − 1/(2N)] per pair (N presentations).
// Throws InvalidArgument when a pair was never presented.
std::vector<double> thurstone_scores(const PreferenceMatrix& P);

// Scores plus a percentile 95% interval from `bootstrap` resamples of
// observers (votes grouped by observer id). bootstrap = 0 skips the interval.
ThurstoneResult thurstone_case_v(int n_methods, const std::vector<Vote>& votes, int bootstrap,
                                 std::uint64_t seed);

// Matrix-only form: without observer records the bootstrap resamples
// individual votes.
ThurstoneResult thurstone_case_v(const PreferenceMatrix& P, int bootstrap, std::uint64_t seed);

// Each observer judges every unordered pair once, preferring i over j with
// probability Φ(s_i − s_j).
std::vector<Vote> simulate_votes(const std::vector<double>& true_scales, int observers, std::uint64_t seed);

/// Votes CSV: header `observer,left_method,right_method,choice`, choice in {left,right}.
struct VoteTable {
    std::vector<std::string> methods;  // sorted by name
    std::vector<Vote> votes;
};

// Throws InvalidArgument naming the 1-based line number of a malformed row.
VoteTable parse_votes_csv(std::istream& in);
VoteTable read_votes_csv(const std::filesystem::path& path);

}  // namespace spotlight
