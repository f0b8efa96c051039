#include "spotlight/toy_denoiser.hpp"

#include <cmath>

#include "spotlight/error.hpp"
#include "spotlight/imagecore.hpp"

namespace spotlight {

LatentTensor pixels_to_latent(const PixelMap& img) {
    LatentTensor lat(img.channels(), img.height(), img.width());
    for (int c = 0; c < img.channels(); ++c) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                lat.at(c, y, x) = static_cast<float>(img.at(x, y, c));
            }
        }
    }
    return lat;
}

PixelMap latent_to_pixels(const LatentTensor& lat, ColorSpace space) {
    PixelMap img(lat.width(), lat.height(), lat.channels(), space);
    for (int c = 0; c < lat.channels(); ++c) {
        for (int y = 0; y < lat.height(); ++y) {
            for (int x = 0; x < lat.width(); ++x) {
                img.at(x, y, c) = lat.at(c, y, x);
            }
        }
    }
    return img;
}

LatentTensor IdentityCodec::encode(const PixelMap& img) {
    if (img.channels() != channels_) {
        throw DimensionMismatch("identity codec expects " + std::to_string(channels_) + " channels");
    }
    return pixels_to_latent(img);
}

PixelMap IdentityCodec::decode(const LatentTensor& latent) {
    if (latent.channels() != channels_) {
        throw DimensionMismatch("identity codec expects " + std::to_string(channels_) + " latent channels");
    }
    return latent_to_pixels(latent);
}

ToyDenoiser::ToyDenoiser(ToyTargetRule rule, int train_steps)
    : rule_(rule), schedule_(NoiseSchedule::make(train_steps, 1)) {}

ToyDenoiser::ToyDenoiser(CustomRule rule, int train_steps)
    : rule_(ToyTargetRule::composite), custom_(std::move(rule)), schedule_(NoiseSchedule::make(train_steps, 1)) {}

LatentTensor ToyDenoiser::target(const BranchInputs& inputs, Branch branch, int width, int height) const {
    if (custom_) {
        return custom_(inputs, branch, width, height);
    }
    PixelMap g = inputs.guidance_composite;
    const PixelMap* shading = inputs.intrinsics.find("shading");
    if (rule_ == ToyTargetRule::shaded_composite && shading != nullptr) {
        if (shading->width() != g.width() || shading->height() != g.height()) {
            throw DimensionMismatch("shading does not match the guidance composite");
        }
        for (int y = 0; y < g.height(); ++y) {
            for (int x = 0; x < g.width(); ++x) {
                const double m = inputs.object_mask.at(x, y);
                if (m == 0.0) {
                    continue;
                }
                for (int c = 0; c < g.channels(); ++c) {
                    const double s = shading->at(x, y, shading->channels() == 1 ? 0 : c);
                    g.at(x, y, c) *= (1.0 - m) + m * s;
                }
            }
        }
    }
    return pixels_to_latent(downsample_bilinear(g, width, height));
}

LatentTensor toy_v_prediction(const LatentTensor& z, const LatentTensor& target, double alpha_bar) {
    if (!z.same_shape(target)) {
        throw DimensionMismatch("toy target shape differs from the latent");
    }
    if (!(alpha_bar < 1.0)) {
        // Noiseless endpoint: v = −√(1−ᾱ)·T + √ᾱ·ε with no recoverable ε; use ε = 0.
        return LatentTensor(z.channels(), z.height(), z.width());
    }
    const double sa = std::sqrt(alpha_bar);
    const double sb = std::sqrt(1.0 - alpha_bar);
    LatentTensor v(z.channels(), z.height(), z.width());
    auto pz = z.data();
    auto pt = target.data();
    auto pv = v.data();
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double eps = (pz[i] - sa * pt[i]) / sb;
        pv[i] = static_cast<float>(sa * eps - sb * pt[i]);
    }
    return v;
}

LatentTensor ToyDenoiser::denoise(const LatentTensor& z, const BranchInputs& inputs, int t, Branch branch) {
    const LatentTensor target_latent = target(inputs, branch, z.width(), z.height());
    if (target_latent.channels() != z.channels()) {
        throw DimensionMismatch("toy target has " + std::to_string(target_latent.channels()) +
                                " channels, latent has " + std::to_string(z.channels()));
    }
    return toy_v_prediction(z, target_latent, schedule_.alpha_bar(t));
}

}  // namespace spotlight
