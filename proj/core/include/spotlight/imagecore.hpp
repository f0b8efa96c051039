#pragma once

// Color transfer, mask morphology, resampling and the shadow-guidance
// composite. Every function here is pure.

#include "spotlight/image.hpp"

namespace spotlight {

inline constexpr int kDefaultDilationKernel = 33;
inline constexpr double kDefaultShadowGain = 0.4;

double srgb_to_linear(double v) noexcept;
double linear_to_srgb(double v) noexcept;

// Applies the sRGB EOTF/OETF to color channels; a fourth (alpha) channel is
// copied unchanged. Returns the input unchanged when already in `target`.
PixelMap color_transfer(const PixelMap& img, ColorSpace target);

// Binarizes at 0.5 (v >= 0.5 -> 1) and dilates with a k×k square window
// clipped at the borders. k must be odd and >= 1.
MaskMap dilate_mask(const MaskMap& m, int k = kDefaultDilationKernel);

// Binary erosion with the same window convention as dilate_mask.
MaskMap erode_mask(const MaskMap& m, int k);

// Dilation followed by erosion. Never removes a set pixel.
MaskMap close_mask(const MaskMap& m, int k);

MaskMap binarize(const MaskMap& m, double threshold = 0.5);

// Area-weighted resampling: each output pixel is the box integral of the
// bilinear (piecewise-constant cell) reconstruction of the input over its
// footprint. Same dims returns the input unchanged.
MaskMap downsample_bilinear(const MaskMap& m, int out_w, int out_h);
PixelMap downsample_bilinear(const PixelMap& m, int out_w, int out_h);

// g = m_obj·albedo + (1−m_obj)·bg·(1 − m_shw·(1−shadow_gain)).
PixelMap make_guidance_composite(const PixelMap& bg, const PixelMap& albedo, const MaskMap& m_obj,
                                 const MaskMap& m_shw, double shadow_gain = kDefaultShadowGain);

// Rec. 709 luma of a color pixel (or the single channel for grayscale).
double luminance(const PixelMap& img, int x, int y) noexcept;

}  // namespace spotlight
