#include "spotlight/guidance.hpp"

#include <cmath>
#include <exception>
#include <future>
#include <string>

#include "spotlight/error.hpp"

namespace spotlight {

void GuidanceConfig::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("gamma must be finite and >= 0");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidArgument("beta must lie in [0,1]");
    }
    if (dilation_kernel < 1 || dilation_kernel % 2 == 0) {
        throw InvalidArgument("dilation kernel must be odd and >= 1");
    }
    if (steps < 1 || steps > train_steps) {
        throw InvalidArgument("steps must lie in [1, train_steps]");
    }
}

void SceneBundle::validate() const {
    if (background.empty() || albedo.empty() || object_mask.empty() || shadow_positive.empty()) {
        throw InvalidArgument("scene is missing background, albedo, object mask or shadow mask");
    }
    if (background.channels() != 3 || !background.same_dims(albedo)) {
        throw DimensionMismatch("background and albedo must be RGB images of the same size");
    }
    if (!object_mask.same_dims(background) || !shadow_positive.same_dims(background)) {
        throw DimensionMismatch("masks must match the background dimensions");
    }
    if (shadow_negative && !shadow_negative->same_dims(background)) {
        throw DimensionMismatch("negative shadow mask must match the background dimensions");
    }
    for (const auto* shading : {shading_positive ? &*shading_positive : nullptr,
                                shading_negative ? &*shading_negative : nullptr}) {
        if (shading != nullptr && (shading->width() != background.width() ||
                                   shading->height() != background.height())) {
            throw DimensionMismatch("shading map must match the background dimensions");
        }
    }
    if (!intrinsics.empty() && (intrinsics.width() != background.width() ||
                                intrinsics.height() != background.height())) {
        throw DimensionMismatch("intrinsics must match the background dimensions");
    }
    if (background.space() != ColorSpace::linear || albedo.space() != ColorSpace::linear) {
        throw InvalidArgument("scene images must be in linear space");
    }
}

LatentTensor blend_shadow_latents(const LatentTensor& z_t, const LatentTensor& g_lat,
                                  const MaskMap& m_shw_lat, const NoiseSchedule& schedule, int t,
                                  double beta, NormalStream& noise) {
    if (!z_t.same_shape(g_lat)) {
        throw DimensionMismatch("guidance latent shape differs from z_t");
    }
    if (m_shw_lat.width() != z_t.width() || m_shw_lat.height() != z_t.height()) {
        throw DimensionMismatch("shadow mask is not at latent resolution");
    }
    const LatentTensor eps = noise.latent(z_t.channels(), z_t.height(), z_t.width());
    const LatentTensor noised = add_noise(schedule, g_lat, eps, t);

    LatentTensor out = z_t;
    for (int c = 0; c < z_t.channels(); ++c) {
        for (int y = 0; y < z_t.height(); ++y) {
            for (int x = 0; x < z_t.width(); ++x) {
                const double w = beta * m_shw_lat.at(x, y);
                if (w == 0.0) {
                    continue;
                }
                out.at(c, y, x) = static_cast<float>((1.0 - w) * z_t.at(c, y, x) + w * noised.at(c, y, x));
            }
        }
    }
    return out;
}

VPrediction masked_guidance(const VPrediction& v_pos, const VPrediction& v_neg,
                            const MaskMap& m_obj_lat, double gamma) {
    const LatentTensor& pos = v_pos.tensor;
    const LatentTensor& neg = v_neg.tensor;
    if (!pos.same_shape(neg)) {
        throw DimensionMismatch("branch predictions differ in shape");
    }
    if (m_obj_lat.width() != pos.width() || m_obj_lat.height() != pos.height()) {
        throw DimensionMismatch("object mask is not at latent resolution");
    }
    if (gamma == 1.0) {
        return v_pos;
    }
    VPrediction out = v_pos;
    for (int c = 0; c < pos.channels(); ++c) {
        for (int y = 0; y < pos.height(); ++y) {
            for (int x = 0; x < pos.width(); ++x) {
                const double m = m_obj_lat.at(x, y);
                if (m == 0.0) {
                    continue;
                }
                const double p = pos.at(c, y, x);
                const double n = neg.at(c, y, x);
                out.tensor.at(c, y, x) = static_cast<float>((1.0 - m) * p + m * (n + gamma * (p - n)));
            }
        }
    }
    return out;
}

BranchInputs make_branch_inputs(const SceneBundle& scene, Branch branch, NegativeMode mode) {
    BranchInputs in;
    in.intrinsics = scene.intrinsics;
    in.object_mask = scene.object_mask;
    const std::optional<PixelMap>* shading = &scene.shading_positive;
    if (branch == Branch::positive) {
        in.shadow_mask = scene.shadow_positive;
    } else {
        shading = &scene.shading_negative;
        if (mode == NegativeMode::opposite && scene.shadow_negative) {
            in.shadow_mask = *scene.shadow_negative;
        } else {
            in.shadow_mask = MaskMap(scene.background.width(), scene.background.height());
        }
    }
    if (*shading) {
        in.intrinsics.set("shading", **shading);
    }
    in.guidance_composite = make_guidance_composite(scene.background, scene.albedo, scene.object_mask,
                                                    in.shadow_mask, scene.shadow_gain);
    return in;
}

namespace {

VPrediction as_v(LatentTensor pred, PredictionKind kind, const LatentTensor& z, double alpha_bar) {
    if (kind == PredictionKind::v) {
        return {std::move(pred)};
    }
    return v_from_eps_ab(z, pred, alpha_bar);
}

LatentTensor evaluate(Denoiser& f, const LatentTensor& z, const BranchInputs& in, int t, Branch b,
                      int step) {
    LatentTensor out;
    try {
        out = f.denoise(z, in, t, b);
    } catch (const Error& e) {
        throw DenoiserError(step, e.what());
    }
    if (!out.same_shape(z)) {
        throw DenoiserError(step, "prediction shape does not match the latent");
    }
    return out;
}

double branch_gap(const LatentTensor& pos, const LatentTensor& neg, const MaskMap& m) {
    double acc = 0.0;
    std::size_t n = 0;
    for (int c = 0; c < pos.channels(); ++c) {
        for (int y = 0; y < pos.height(); ++y) {
            for (int x = 0; x < pos.width(); ++x) {
                if (m.at(x, y) > 0.0) {
                    acc += std::abs(static_cast<double>(pos.at(c, y, x)) - neg.at(c, y, x));
                    ++n;
                }
            }
        }
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

double rms(const LatentTensor& z) {
    double acc = 0.0;
    for (float v : z.data()) {
        acc += static_cast<double>(v) * v;
    }
    return std::sqrt(acc / static_cast<double>(z.size()));
}

}  // namespace

PixelMap run_pass(const BranchInputs& positive, const BranchInputs* negative, const MaskMap& blend_mask,
                  const GuidanceConfig& cfg, Denoiser& f, Codec& codec, std::vector<StepTrace>* trace) {
    cfg.validate();
    const int width = positive.guidance_composite.width();
    const int height = positive.guidance_composite.height();
    const int ds = codec.downscale();
    if (ds < 1 || width % ds != 0 || height % ds != 0) {
        throw DimensionMismatch("image size " + std::to_string(width) + "x" + std::to_string(height) +
                                " is not divisible by the codec downscale " + std::to_string(ds));
    }
    const int lw = width / ds;
    const int lh = height / ds;
    const int lc = codec.latent_channels();

    const NoiseSchedule schedule = NoiseSchedule::make(cfg.train_steps, cfg.steps);
    const MaskMap m_obj_lat = downsample_bilinear(positive.object_mask, lw, lh);

    const bool blending = cfg.blending && cfg.beta > 0.0 && !blend_mask.all_zero();
    MaskMap m_shw_lat;
    LatentTensor g_lat;
    if (blending) {
        m_shw_lat = downsample_bilinear(dilate_mask(blend_mask, cfg.dilation_kernel), lw, lh);
        g_lat = codec.encode(positive.guidance_composite);
        if (g_lat.channels() != lc || g_lat.width() != lw || g_lat.height() != lh) {
            throw DimensionMismatch("codec produced an unexpected latent shape");
        }
    }

    const bool use_negative = !cfg.positive_only && negative != nullptr;
    NormalStream init(cfg.seed, StreamPurpose::init_noise);
    NormalStream blend_noise(cfg.seed, StreamPurpose::blend_noise);
    LatentTensor z = init.latent(lc, lh, lw);

    const auto& steps = schedule.timesteps();
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const int step = static_cast<int>(i);
        const int t = steps[i];
        const int t_prev = schedule.previous(i);
        const double ab = schedule.alpha_bar(t);

        const LatentTensor z_tilde =
            blending ? blend_shadow_latents(z, g_lat, m_shw_lat, schedule, t, cfg.beta, blend_noise) : z;

        VPrediction v_pos;
        VPrediction v_neg;
        if (use_negative && f.reentrant()) {
            auto neg_future = std::async(std::launch::async, [&] {
                return evaluate(f, z_tilde, *negative, t, Branch::negative, step);
            });
            LatentTensor pos_raw;
            try {
                pos_raw = evaluate(f, z_tilde, positive, t, Branch::positive, step);
            } catch (...) {
                neg_future.wait();
                throw;
            }
            v_pos = as_v(std::move(pos_raw), f.prediction_kind(), z_tilde, ab);
            v_neg = as_v(neg_future.get(), f.prediction_kind(), z_tilde, ab);
        } else {
            v_pos = as_v(evaluate(f, z_tilde, positive, t, Branch::positive, step), f.prediction_kind(),
                         z_tilde, ab);
            if (use_negative) {
                v_neg = as_v(evaluate(f, z_tilde, *negative, t, Branch::negative, step),
                             f.prediction_kind(), z_tilde, ab);
            }
        }
        if (!v_pos.tensor.all_finite() || (use_negative && !v_neg.tensor.all_finite())) {
            throw NumericalAbort(step, "denoiser returned non-finite values");
        }

        const VPrediction v = use_negative ? masked_guidance(v_pos, v_neg, m_obj_lat, cfg.gamma) : v_pos;
        z = ddim_step(schedule, z_tilde, v, t, t_prev);
        if (!z.all_finite()) {
            throw NumericalAbort(step, "latent diverged after DDIM update");
        }

        if (trace != nullptr) {
            StepTrace st;
            st.step = step;
            st.t = t;
            st.t_prev = t_prev;
            st.branch_gap = use_negative ? branch_gap(v_pos.tensor, v_neg.tensor, m_obj_lat) : 0.0;
            if (blending) {
                st.blend_weight = cfg.beta * m_shw_lat.sum();
            }
            st.latent_rms = rms(z);
            trace->push_back(st);
        }
    }

    PixelMap img = codec.decode(z);
    if (img.width() != width || img.height() != height) {
        throw DimensionMismatch("codec decoded an image of unexpected size");
    }
    for (double& v : img.data()) {
        v = std::max(v, 0.0);
    }
    img.set_space(ColorSpace::linear);
    return img;
}

SamplerResult run_sampler(const SceneBundle& scene, const GuidanceConfig& cfg, Denoiser& f,
                          Codec& codec) {
    scene.validate();
    cfg.validate();
    const BranchInputs positive = make_branch_inputs(scene, Branch::positive, cfg.negative);
    const BranchInputs negative = make_branch_inputs(scene, Branch::negative, cfg.negative);

    SamplerResult result;
    result.image_with = run_pass(positive, &negative, scene.shadow_positive, cfg, f, codec, &result.trace);

    BranchInputs unshadowed = positive;
    unshadowed.shadow_mask = MaskMap(scene.background.width(), scene.background.height());
    unshadowed.guidance_composite = make_guidance_composite(
        scene.background, scene.albedo, scene.object_mask, unshadowed.shadow_mask, scene.shadow_gain);
    GuidanceConfig plain = cfg;
    plain.gamma = 1.0;
    plain.positive_only = true;
    result.image_without = run_pass(unshadowed, nullptr, unshadowed.shadow_mask, plain, f, codec);
    return result;
}

}  // namespace spotlight
