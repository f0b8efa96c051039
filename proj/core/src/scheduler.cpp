#include "spotlight/scheduler.hpp"

#include <cmath>
#include <string>

#include "spotlight/error.hpp"

namespace spotlight {

NoiseSchedule NoiseSchedule::make(int train_steps, int inference_steps, BetaSchedule kind) {
    if (train_steps < 1 || inference_steps < 1 || inference_steps > train_steps) {
        throw InvalidArgument("invalid step counts: train=" + std::to_string(train_steps) +
                              " inference=" + std::to_string(inference_steps));
    }
    NoiseSchedule s;
    s.alphas_bar_.resize(train_steps);
    switch (kind) {
        case BetaSchedule::scaled_linear: {
            const double lo = std::sqrt(0.00085);
            const double hi = std::sqrt(0.012);
            double prod = 1.0;
            for (int i = 0; i < train_steps; ++i) {
                const double frac = train_steps == 1 ? 0.0 : static_cast<double>(i) / (train_steps - 1);
                const double root = lo + (hi - lo) * frac;
                prod *= 1.0 - root * root;
                s.alphas_bar_[i] = prod;
            }
            break;
        }
    }
    const int spacing = train_steps / inference_steps;
    s.timesteps_.reserve(inference_steps);
    for (int i = inference_steps - 1; i >= 0; --i) {
        s.timesteps_.push_back(i * spacing);
    }
    // Full schedules start from the last training step.
    if (inference_steps == train_steps) {
        for (int i = 0; i < inference_steps; ++i) {
            s.timesteps_[i] = train_steps - 1 - i;
        }
    }
    return s;
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == -1) {
        return 1.0;
    }
    if (t < 0 || t >= train_steps()) {
        throw InvalidArgument("timestep " + std::to_string(t) + " outside schedule");
    }
    return alphas_bar_[t];
}

namespace {

void check_shapes(const LatentTensor& a, const LatentTensor& b) {
    if (!a.same_shape(b)) {
        throw DimensionMismatch("latent shapes differ");
    }
}

// out = ca·a + cb·b, elementwise in double.
LatentTensor lincomb(double ca, const LatentTensor& a, double cb, const LatentTensor& b) {
    check_shapes(a, b);
    LatentTensor out(a.channels(), a.height(), a.width());
    auto pa = a.data();
    auto pb = b.data();
    auto po = out.data();
    for (std::size_t i = 0; i < po.size(); ++i) {
        po[i] = static_cast<float>(ca * static_cast<double>(pa[i]) + cb * static_cast<double>(pb[i]));
    }
    return out;
}

}  // namespace

LatentTensor add_noise_ab(const LatentTensor& x0, const LatentTensor& eps, double alpha_bar) {
    return lincomb(std::sqrt(alpha_bar), x0, std::sqrt(1.0 - alpha_bar), eps);
}

VPrediction v_from_ab(const LatentTensor& x0, const LatentTensor& eps, double alpha_bar) {
    return {lincomb(std::sqrt(alpha_bar), eps, -std::sqrt(1.0 - alpha_bar), x0)};
}

LatentTensor x0_from_ab(const LatentTensor& x_t, const VPrediction& v, double alpha_bar) {
    return lincomb(std::sqrt(alpha_bar), x_t, -std::sqrt(1.0 - alpha_bar), v.tensor);
}

LatentTensor eps_from_ab(const LatentTensor& x_t, const VPrediction& v, double alpha_bar) {
    return lincomb(std::sqrt(1.0 - alpha_bar), x_t, std::sqrt(alpha_bar), v.tensor);
}

VPrediction v_from_eps_ab(const LatentTensor& x_t, const LatentTensor& eps, double alpha_bar) {
    if (!(alpha_bar > 0.0)) {
        throw InvalidArgument("cannot convert eps to v at alpha_bar = 0");
    }
    const double inv = 1.0 / std::sqrt(alpha_bar);
    return {lincomb(inv, eps, -std::sqrt(1.0 - alpha_bar) * inv, x_t)};
}

LatentTensor add_noise(const NoiseSchedule& s, const LatentTensor& x0, const LatentTensor& eps, int t) {
    return add_noise_ab(x0, eps, s.alpha_bar(t));
}

VPrediction v_from(const NoiseSchedule& s, const LatentTensor& x0, const LatentTensor& eps, int t) {
    return v_from_ab(x0, eps, s.alpha_bar(t));
}

LatentTensor x0_from(const NoiseSchedule& s, const LatentTensor& x_t, const VPrediction& v, int t) {
    return x0_from_ab(x_t, v, s.alpha_bar(t));
}

LatentTensor eps_from(const NoiseSchedule& s, const LatentTensor& x_t, const VPrediction& v, int t) {
    return eps_from_ab(x_t, v, s.alpha_bar(t));
}

LatentTensor ddim_step(const NoiseSchedule& s, const LatentTensor& z_t, const VPrediction& v, int t,
                       int t_prev) {
    if (t_prev >= t || t_prev < -1) {
        throw InvalidArgument("ddim_step requires t_prev < t (got t=" + std::to_string(t) +
                              ", t_prev=" + std::to_string(t_prev) + ")");
    }
    check_shapes(z_t, v.tensor);
    const double ab = s.alpha_bar(t);
    const double ab_prev = s.alpha_bar(t_prev);
    const double sa = std::sqrt(ab);
    const double sb = std::sqrt(1.0 - ab);
    const double sa_prev = std::sqrt(ab_prev);
    const double sb_prev = std::sqrt(1.0 - ab_prev);

    LatentTensor out(z_t.channels(), z_t.height(), z_t.width());
    auto pz = z_t.data();
    auto pv = v.tensor.data();
    auto po = out.data();
    for (std::size_t i = 0; i < po.size(); ++i) {
        const double z = pz[i];
        const double vv = pv[i];
        const double x0 = sa * z - sb * vv;
        if (t_prev == -1) {
            po[i] = static_cast<float>(x0);
            continue;
        }
        const double eps = sb * z + sa * vv;
        po[i] = static_cast<float>(sa_prev * x0 + sb_prev * eps);
    }
    return out;
}

}  // namespace spotlight
