#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace oracle {

double normal_quantile(double p) {
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 0.5 * std::erfc(-mid / std::numbers::sqrt2);
        if (cdf < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double srgb_decode(double v) {
    if (v <= 0.04045) {
        return v / 12.92;
    }
    return std::pow((v + 0.055) / 1.055, 2.4);
}

double srgb_encode(double v) {
    if (v <= 0.0031308) {
        return 12.92 * v;
    }
    return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

spotlight::MaskMap dilate(const spotlight::MaskMap& m, int k) {
    const int r = k / 2;
    spotlight::MaskMap out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            double v = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height() && m.at(xx, yy) >= 0.5) {
                        v = 1.0;
                    }
                }
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

double ssim_constant(double a, double b, double k1) {
    const double c1 = k1 * k1;
    return (2.0 * a * b + c1) / (a * a + b * b + c1);
}

double sphere_integral_mc(const std::function<double(double, double, double)>& f, int nz, int nphi,
                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double acc = 0.0;
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nphi; ++j) {
            const double z = -1.0 + 2.0 * (i + u(rng)) / nz;
            const double phi = 2.0 * std::numbers::pi * (j + u(rng)) / nphi;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            acc += f(r * std::cos(phi), r * std::sin(phi), z);
        }
    }
    return 4.0 * std::numbers::pi * acc / (static_cast<double>(nz) * nphi);
}

Reflected reflect_light(double x, double y, double h, double xo, double yo, int width, int height) {
    const double foot_y = y - h;
    const double rx = xo + (xo - x);
    const double rfoot_y = yo + (yo - foot_y);
    return {std::min(std::max(rx, 0.0), width - 1.0), std::min(std::max(rfoot_y + h, 0.0), height - 1.0), h};
}

Reflected reflect_light_search(int x, int y, int h, double xo, double yo, int width, int height) {
    const int span = 4 * std::max(width, height) + 4 * std::abs(h) + 4 * (std::abs(x) + std::abs(y));
    auto mirror = [&](int p, double center) {
        for (int c = -span; c <= span; ++c) {
            if ((p + c) * 0.5 == center) {
                return c;
            }
        }
        throw std::runtime_error("no grid reflection found");
    };
    const int rx = mirror(x, xo);
    const int rfoot = mirror(y - h, yo);
    const double cx = std::clamp(static_cast<double>(rx), 0.0, width - 1.0);
    const double cy = std::clamp(static_cast<double>(rfoot + h), 0.0, height - 1.0);
    return {cx, cy, static_cast<double>(h)};
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

spotlight::PixelMap random_image(std::mt19937_64& rng, int w, int h, int c, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    spotlight::PixelMap img(w, h, c);
    for (double& v : img.data()) {
        v = u(rng);
    }
    return img;
}

spotlight::LatentTensor random_latent(std::mt19937_64& rng, int c, int h, int w) {
    std::normal_distribution<float> n(0.0f, 1.0f);
    spotlight::LatentTensor t(c, h, w);
    for (float& v : t.data()) {
        v = n(rng);
    }
    return t;
}

}  // namespace oracle
