#pragma once

#include <vector>

#include "spotlight/image.hpp"

namespace spotlight {

enum class BetaSchedule { scaled_linear };

inline constexpr int kDefaultTrainSteps = 1000;
inline constexpr int kDefaultInferenceSteps = 50;

/// Deterministic DDIM schedule. ᾱ is accumulated in double precision.
class NoiseSchedule {
public:
    // Scaled-linear betas: sqrt(beta) linear in [sqrt(0.00085), sqrt(0.012)].
    // Inference timesteps are i·(train/inference) for i < inference, descending.
    static NoiseSchedule make(int train_steps = kDefaultTrainSteps,
                              int inference_steps = kDefaultInferenceSteps,
                              BetaSchedule kind = BetaSchedule::scaled_linear);

    int train_steps() const noexcept { return static_cast<int>(alphas_bar_.size()); }
    const std::vector<double>& alphas_bar() const noexcept { return alphas_bar_; }
    const std::vector<int>& timesteps() const noexcept { return timesteps_; }

    // ᾱ_t; t = −1 denotes the clean endpoint and returns 1.
    double alpha_bar(int t) const;

    // Timestep following timesteps()[i], or −1 after the last one.
    int previous(std::size_t i) const noexcept {
        return i + 1 < timesteps_.size() ? timesteps_[i + 1] : -1;
    }

private:
    std::vector<double> alphas_bar_;
    std::vector<int> timesteps_;
};

/// A denoiser output in v-parametrization.
struct VPrediction {
    LatentTensor tensor;
};

// Closed-form conversions parametrized directly by ᾱ. All arithmetic is done
// in double and stored back as float.
LatentTensor add_noise_ab(const LatentTensor& x0, const LatentTensor& eps, double alpha_bar);
VPrediction v_from_ab(const LatentTensor& x0, const LatentTensor& eps, double alpha_bar);
LatentTensor x0_from_ab(const LatentTensor& x_t, const VPrediction& v, double alpha_bar);
LatentTensor eps_from_ab(const LatentTensor& x_t, const VPrediction& v, double alpha_bar);
// v from an ε-prediction at the same noisy latent: v = (ε − √(1−ᾱ)·x_t)/√ᾱ.
VPrediction v_from_eps_ab(const LatentTensor& x_t, const LatentTensor& eps, double alpha_bar);

// Schedule-indexed forms.
LatentTensor add_noise(const NoiseSchedule& s, const LatentTensor& x0, const LatentTensor& eps, int t);
VPrediction v_from(const NoiseSchedule& s, const LatentTensor& x0, const LatentTensor& eps, int t);
LatentTensor x0_from(const NoiseSchedule& s, const LatentTensor& x_t, const VPrediction& v, int t);
LatentTensor eps_from(const NoiseSchedule& s, const LatentTensor& x_t, const VPrediction& v, int t);

// Deterministic (eta = 0) DDIM update from t to t_prev. t_prev = −1 returns x̂0.
LatentTensor ddim_step(const NoiseSchedule& s, const LatentTensor& z_t, const VPrediction& v, int t,
                       int t_prev);

}  // namespace spotlight
