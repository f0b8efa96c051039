#include "spotlight/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spotlight/error.hpp"

namespace spotlight {

ShadowMatte shadow_matte(const PixelMap& img_with, const PixelMap& img_without, double eps) {
    if (!img_with.same_dims(img_without)) {
        throw DimensionMismatch("matte inputs differ in size");
    }
    if (!(eps > 0.0)) {
        throw InvalidArgument("matte eps must be positive");
    }
    ShadowMatte m{PixelMap(img_with.width(), img_with.height(), img_with.channels(), ColorSpace::linear)};
    auto w = img_with.data();
    auto wo = img_without.data();
    auto out = m.attenuation.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = wo[i] < eps ? 1.0 : std::clamp(w[i] / (wo[i] + eps), 0.0, 1.0);
    }
    return m;
}

PixelMap preserve_background(const PixelMap& bg, const PixelMap& img_with, const ShadowMatte& matte,
                             const MaskMap& m_obj) {
    if (!bg.same_dims(img_with) || !bg.same_dims(matte.attenuation) || !m_obj.same_dims(bg)) {
        throw DimensionMismatch("background composite inputs differ in size");
    }
    PixelMap out(bg.width(), bg.height(), bg.channels(), ColorSpace::linear);
    for (int y = 0; y < bg.height(); ++y) {
        for (int x = 0; x < bg.width(); ++x) {
            const double mo = m_obj.at(x, y);
            for (int c = 0; c < bg.channels(); ++c) {
                const double kept = bg.at(x, y, c) * matte.attenuation.at(x, y, c);
                out.at(x, y, c) = mo == 0.0 ? kept : mo * img_with.at(x, y, c) + (1.0 - mo) * kept;
            }
        }
    }
    return out;
}

namespace {

int reflect(int i, int n) {
    // Mirror without repeating the edge sample: -1 -> 1, n -> n-2.
    if (n == 1) {
        return 0;
    }
    while (i < 0 || i >= n) {
        i = i < 0 ? -i : 2 * (n - 1) - i;
    }
    return i;
}

}  // namespace

PixelMap gaussian_blur(const PixelMap& img, double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidArgument("blur sigma must be positive");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        total += kernel[i + radius];
    }
    for (double& k : kernel) {
        k /= total;
    }
    const int w = img.width();
    const int h = img.height();
    const int ch = img.channels();
    PixelMap tmp(w, h, ch, img.space());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    acc += kernel[i + radius] * img.at(reflect(x + i, w), y, c);
                }
                tmp.at(x, y, c) = acc;
            }
        }
    }
    PixelMap out(w, h, ch, img.space());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    acc += kernel[i + radius] * tmp.at(x, reflect(y + i, h), c);
                }
                out.at(x, y, c) = acc;
            }
        }
    }
    return out;
}

PixelMap detail_transfer(const PixelMap& src, const PixelMap& tgt, double sigma, const MaskMap* mask) {
    if (!src.same_dims(tgt)) {
        throw DimensionMismatch("detail transfer inputs differ in size");
    }
    if (mask != nullptr && !mask->same_dims(src)) {
        throw DimensionMismatch("detail transfer mask differs in size");
    }
    const PixelMap blurred = gaussian_blur(src, sigma);
    PixelMap out = tgt;
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            const double m = mask != nullptr ? mask->at(x, y) : 1.0;
            if (m == 0.0) {
                continue;
            }
            for (int c = 0; c < src.channels(); ++c) {
                const double detail = src.at(x, y, c) - blurred.at(x, y, c);
                out.at(x, y, c) = std::max(0.0, tgt.at(x, y, c) + m * detail);
            }
        }
    }
    return out;
}

PixelMap reexposed_render(const RenderFn& render, const PixelMap& input, double factor) {
    if (!(factor > 0.0)) {
        throw InvalidArgument("re-exposure factor must be positive");
    }
    PixelMap scaled = input;
    for (double& v : scaled.data()) {
        v *= factor;
    }
    PixelMap out = render(scaled);
    for (double& v : out.data()) {
        v /= factor;
    }
    return out;
}

}  // namespace spotlight
