#include "spotlight/lighting.hpp"

#include <cmath>
#include <numbers>

#include "spotlight/error.hpp"

namespace spotlight {

void EnvMapParams::validate() const {
    if (!(lambda > 0.0)) {
        throw InvalidArgument("envmap bandwidth must be positive");
    }
    if (std::abs(v.norm() - 1.0) > 1e-9) {
        throw InvalidArgument("dominant direction must be a unit vector");
    }
    for (int c = 0; c < 3; ++c) {
        if (!(c_light[c] >= 0.0) || !(c_amb[c] >= 0.0)) {
            throw InvalidArgument("envmap colors must be non-negative");
        }
    }
}

Rgb eval_envmap(const Vec3& omega, const EnvMapParams& p) {
    // For unit vectors ω·v − 1 = −|ω − v|²/2, which keeps precision near the peak.
    const Vec3 d = omega - p.v;
    const double lobe = std::exp(-0.5 * p.lambda * d.dot(d));
    return {p.c_light[0] * lobe + p.c_amb[0], p.c_light[1] * lobe + p.c_amb[1],
            p.c_light[2] * lobe + p.c_amb[2]};
}

Rgb ambient_from_background(const PixelMap& bg) {
    if (bg.empty() || bg.pixel_count() == 0) {
        throw InvalidArgument("ambient estimation needs a non-empty image");
    }
    if (bg.channels() < 3) {
        throw InvalidArgument("ambient estimation needs an RGB image");
    }
    Rgb sum{0.0, 0.0, 0.0};
    for (int y = 0; y < bg.height(); ++y) {
        for (int x = 0; x < bg.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                sum[c] += bg.at(x, y, c);
            }
        }
    }
    const double n = static_cast<double>(bg.pixel_count());
    return {sum[0] / n, sum[1] / n, sum[2] / n};
}

Rgb light_color(const Rgb& c_amb, double k) {
    const double norm = std::sqrt(c_amb[0] * c_amb[0] + c_amb[1] * c_amb[1] + c_amb[2] * c_amb[2]);
    if (!(norm > 0.0)) {
        throw InvalidArgument("ambient color is zero; light color is undefined");
    }
    return {k * c_amb[0] / norm, k * c_amb[1] / norm, k * c_amb[2] / norm};
}

EnvMapParams make_envmap(const PixelMap& bg, const Vec3& dominant, double k, double lambda) {
    EnvMapParams p;
    p.c_amb = ambient_from_background(bg);
    p.k = k;
    p.c_light = light_color(p.c_amb, k);
    p.lambda = lambda;
    p.v = dominant.normalized();
    p.validate();
    return p;
}

std::vector<DirectionalLight> user_controlled_directions(double elevation_deg, int count,
                                                         const GroundFrame& frame) {
    if (count < 1 || count % 2 == 0) {
        throw InvalidArgument("direction count must be odd and >= 1");
    }
    // Azimuth 90° places the light behind the object (see GroundFrame).
    constexpr double behind = 90.0;
    constexpr double spacing = 45.0;
    const int half = count / 2;
    std::vector<DirectionalLight> out;
    out.reserve(count);
    for (int i = -half; i <= half; ++i) {
        out.push_back(DirectionalLight::from_angles(behind + i * spacing, elevation_deg, frame));
    }
    return out;
}

PixelMap envmap_latlong(const EnvMapParams& p, int width, int height, const GroundFrame& frame) {
    if (width < 1 || height < 1) {
        throw InvalidArgument("lat-long size must be positive");
    }
    const Vec3 up = frame.up.normalized();
    const Vec3 fwd0{0.0, 0.0, 1.0};
    const Vec3 forward = (fwd0 - up * fwd0.dot(up)).normalized();
    const Vec3 right = forward.cross(up);
    PixelMap out(width, height, 3, ColorSpace::linear);
    for (int i = 0; i < height; ++i) {
        const double theta = std::numbers::pi * (i + 0.5) / height;
        for (int j = 0; j < width; ++j) {
            const double phi = 2.0 * std::numbers::pi * (j + 0.5) / width - std::numbers::pi;
            const Vec3 omega = up * std::cos(theta) +
                               (forward * std::cos(phi) + right * std::sin(phi)) * std::sin(theta);
            const Rgb L = eval_envmap(omega, p);
            for (int c = 0; c < 3; ++c) {
                out.at(j, i, c) = L[c];
            }
        }
    }
    return out;
}

}  // namespace spotlight
