#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "spotlight/image.hpp"
#include "spotlight/shadowsynth.hpp"

namespace spotlight {

using Rgb = std::array<double, 3>;

inline constexpr double kDefaultBandwidth = 300.0;
// Dominant-light to ambient intensity ratio. The original value was measured
// on a panorama dataset (halved to count one hemisphere) that is not shipped
// here, so this is a configurable constant rather than a measured one.
inline constexpr double kDefaultLightRatio = 6.0;

/// Spherical gaussian plus constant ambient term.
struct EnvMapParams {
    Rgb c_light{0.0, 0.0, 0.0};
    Rgb c_amb{0.0, 0.0, 0.0};
    double lambda = kDefaultBandwidth;
    Vec3 v{0.0, -1.0, 0.0};
    double k = kDefaultLightRatio;

    void validate() const;
};

// L(ω) = c_light·exp(λ(ω·v − 1)) + c_amb for unit ω and v.
Rgb eval_envmap(const Vec3& omega, const EnvMapParams& p);

// Per-channel mean of a linear RGB image.
Rgb ambient_from_background(const PixelMap& bg);

// k · c_amb/|c_amb|.
Rgb light_color(const Rgb& c_amb, double k);

// Environment from a background and a dominant direction, using the two
// functions above.
EnvMapParams make_envmap(const PixelMap& bg, const Vec3& dominant, double k = kDefaultLightRatio,
                         double lambda = kDefaultBandwidth);

// `count` directions at a fixed elevation, symmetric about the azimuth that
// puts the light behind the object, 45° apart.
std::vector<DirectionalLight> user_controlled_directions(double elevation_deg = 45.0, int count = 5,
                                                         const GroundFrame& frame = {});

// Equirectangular rendering: row 0 is the zenith (+up), column W/2 faces +Z.
// Directions use the frame's up axis; +Z is camera forward.
PixelMap envmap_latlong(const EnvMapParams& p, int width, int height, const GroundFrame& frame = {});

}  // namespace spotlight
