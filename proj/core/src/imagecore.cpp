#include "spotlight/imagecore.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spotlight/error.hpp"

namespace spotlight {

double srgb_to_linear(double v) noexcept {
    if (v <= 0.04045) {
        return v / 12.92;
    }
    return std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) noexcept {
    if (v <= 0.0031308) {
        return v * 12.92;
    }
    return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

PixelMap color_transfer(const PixelMap& img, ColorSpace target) {
    if (img.space() == target || img.empty()) {
        return img;
    }
    PixelMap out = img;
    out.set_space(target);
    const int color_channels = img.channels() == 4 ? 3 : img.channels();
    const auto fn = target == ColorSpace::linear ? srgb_to_linear : linear_to_srgb;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < color_channels; ++c) {
                out.at(x, y, c) = fn(img.at(x, y, c));
            }
        }
    }
    return out;
}

MaskMap binarize(const MaskMap& m, double threshold) {
    MaskMap out(m.width(), m.height());
    auto src = m.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] >= threshold ? 1.0 : 0.0;
    }
    return out;
}

namespace {

void check_kernel(int k) {
    if (k < 1 || k % 2 == 0) {
        throw InvalidArgument("morphology kernel size must be odd and >= 1, got " + std::to_string(k));
    }
}

// Separable square-window max (dilate) or min (erode) over a binary mask,
// with the window clipped at the image borders.
MaskMap window_extremum(const MaskMap& bin, int k, bool take_max) {
    const int w = bin.width();
    const int h = bin.height();
    const int r = k / 2;
    std::vector<double> tmp(static_cast<std::size_t>(w) * h);
    MaskMap out(w, h);
    auto src = bin.data();
    auto dst = out.data();
    const auto pick = [take_max](double a, double b) { return take_max ? std::max(a, b) : std::min(a, b); };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = src[static_cast<std::size_t>(y) * w + x];
            const int x0 = std::max(0, x - r);
            const int x1 = std::min(w - 1, x + r);
            for (int xx = x0; xx <= x1; ++xx) {
                acc = pick(acc, src[static_cast<std::size_t>(y) * w + xx]);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r);
        const int y1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
            double acc = tmp[static_cast<std::size_t>(y) * w + x];
            for (int yy = y0; yy <= y1; ++yy) {
                acc = pick(acc, tmp[static_cast<std::size_t>(yy) * w + x]);
            }
            dst[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

}  // namespace

MaskMap dilate_mask(const MaskMap& m, int k) {
    check_kernel(k);
    return window_extremum(binarize(m), k, true);
}

MaskMap erode_mask(const MaskMap& m, int k) {
    check_kernel(k);
    return window_extremum(binarize(m), k, false);
}

MaskMap close_mask(const MaskMap& m, int k) {
    MaskMap closed = erode_mask(dilate_mask(m, k), k);
    // Clipped windows can erode border pixels that were set in the input;
    // closing must stay extensive.
    auto bin = binarize(m);
    auto dst = closed.data();
    auto src = bin.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = std::max(dst[i], src[i]);
    }
    return closed;
}

namespace {

struct AxisWeights {
    // For each output index: contributing input indices and their weights.
    std::vector<std::vector<std::pair<int, double>>> taps;
};

// Exact overlap of output cell [o·s, (o+1)·s) with each input cell, s = in/out.
AxisWeights area_weights(int in, int out) {
    AxisWeights aw;
    aw.taps.resize(out);
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
        const double lo = o * scale;
        const double hi = (o + 1) * scale;
        const int i0 = static_cast<int>(std::floor(lo));
        const int i1 = std::min(in - 1, static_cast<int>(std::ceil(hi)) - 1);
        for (int i = i0; i <= i1; ++i) {
            const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
            if (overlap > 0.0) {
                aw.taps[o].emplace_back(i, overlap / scale);
            }
        }
    }
    return aw;
}

void check_target(int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) {
        throw InvalidArgument("resample target dimensions must be >= 1");
    }
}

// Resamples `channels` interleaved planes. A footprint covering a single
// value reproduces that value exactly.
std::vector<double> resample(std::span<const double> src, int w, int h, int channels, int out_w,
                             int out_h) {
    const AxisWeights wx = area_weights(w, out_w);
    const AxisWeights wy = area_weights(h, out_h);
    std::vector<double> out(static_cast<std::size_t>(out_w) * out_h * channels, 0.0);
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            for (int c = 0; c < channels; ++c) {
                double acc = 0.0;
                double lo = src[(static_cast<std::size_t>(wy.taps[oy][0].first) * w +
                                 wx.taps[ox][0].first) * channels + c];
                double hi = lo;
                for (const auto& [iy, wgt_y] : wy.taps[oy]) {
                    for (const auto& [ix, wgt_x] : wx.taps[ox]) {
                        const double v = src[(static_cast<std::size_t>(iy) * w + ix) * channels + c];
                        acc += wgt_y * wgt_x * v;
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                }
                out[(static_cast<std::size_t>(oy) * out_w + ox) * channels + c] = lo == hi ? lo : acc;
            }
        }
    }
    return out;
}

}  // namespace

MaskMap downsample_bilinear(const MaskMap& m, int out_w, int out_h) {
    check_target(out_w, out_h);
    if (m.width() == out_w && m.height() == out_h) {
        return m;
    }
    auto data = resample(m.data(), m.width(), m.height(), 1, out_w, out_h);
    for (double& v : data) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return MaskMap(out_w, out_h, std::move(data));
}

PixelMap downsample_bilinear(const PixelMap& m, int out_w, int out_h) {
    check_target(out_w, out_h);
    if (m.width() == out_w && m.height() == out_h) {
        return m;
    }
    return PixelMap(out_w, out_h, m.channels(), m.space(),
                    resample(m.data(), m.width(), m.height(), m.channels(), out_w, out_h));
}

PixelMap make_guidance_composite(const PixelMap& bg, const PixelMap& albedo, const MaskMap& m_obj,
                                 const MaskMap& m_shw, double shadow_gain) {
    if (!bg.same_dims(albedo) || !m_obj.same_dims(bg) || !m_shw.same_dims(bg)) {
        throw DimensionMismatch("guidance composite inputs must share dimensions");
    }
    if (!(shadow_gain > 0.0 && shadow_gain <= 1.0)) {
        throw InvalidArgument("shadow_gain must lie in (0,1]");
    }
    if (bg.space() != ColorSpace::linear || albedo.space() != ColorSpace::linear) {
        throw InvalidArgument("guidance composite expects linear-space inputs");
    }
    PixelMap g(bg.width(), bg.height(), bg.channels(), ColorSpace::linear);
    for (int y = 0; y < bg.height(); ++y) {
        for (int x = 0; x < bg.width(); ++x) {
            const double mo = m_obj.at(x, y);
            const double attenuation = 1.0 - m_shw.at(x, y) * (1.0 - shadow_gain);
            for (int c = 0; c < bg.channels(); ++c) {
                const double shaded_bg = bg.at(x, y, c) * attenuation;
                g.at(x, y, c) = mo == 0.0 ? shaded_bg : mo * albedo.at(x, y, c) + (1.0 - mo) * shaded_bg;
            }
        }
    }
    return g;
}

double luminance(const PixelMap& img, int x, int y) noexcept {
    if (img.channels() < 3) {
        return img.at(x, y, 0);
    }
    return 0.2126 * img.at(x, y, 0) + 0.7152 * img.at(x, y, 1) + 0.0722 * img.at(x, y, 2);
}

}  // namespace spotlight
