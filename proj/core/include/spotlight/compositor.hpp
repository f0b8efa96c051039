#pragma once

#include <concepts>
#include <functional>

#include "spotlight/image.hpp"

namespace spotlight {

/// Per-pixel RGB attenuation in [0,1].
struct ShadowMatte {
    PixelMap attenuation;
};

// clamp(with/(without + eps), 0, 1); pixels where without < eps get 1.
ShadowMatte shadow_matte(const PixelMap& img_with, const PixelMap& img_without, double eps = 1e-4);

// out = m_obj·img_with + (1−m_obj)·(bg ⊙ matte).
PixelMap preserve_background(const PixelMap& bg, const PixelMap& img_with, const ShadowMatte& matte,
                             const MaskMap& m_obj);

// Separable normalized Gaussian, radius ⌈3σ⌉, reflect padding.
PixelMap gaussian_blur(const PixelMap& img, double sigma);

// out = tgt + mask·(src − blur(src, σ)), clamped at 0. Without a mask the
// detail layer is added everywhere.
PixelMap detail_transfer(const PixelMap& src, const PixelMap& tgt, double sigma = 1.0,
                         const MaskMap* mask = nullptr);

using RenderFn = std::function<PixelMap(const PixelMap&)>;

// Scales the linear input by `factor`, renders, and divides the output by it.
PixelMap reexposed_render(const RenderFn& render, const PixelMap& input, double factor = 2.0);

}  // namespace spotlight
