#pragma once

// Coarse shadow masks from three sources: light-space shadow mapping of a
// depth-layer object over a back-projected background, pixel-height soft
// shadows for 2D cutouts, and user scribbles.

#include <array>
#include <cmath>
#include <vector>

#include "spotlight/image.hpp"

namespace spotlight {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const noexcept { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const noexcept { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const noexcept { return {x * s, y * s, z * s}; }
    Vec3 operator-() const noexcept { return {-x, -y, -z}; }
    double dot(const Vec3& o) const noexcept { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const noexcept {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const noexcept { return std::sqrt(dot(*this)); }
    Vec3 normalized() const noexcept {
        const double n = norm();
        return n > 0.0 ? *this * (1.0 / n) : *this;
    }
};

inline constexpr double kDefaultFovDeg = 50.0;

/// Camera-space points (x right, y down, z forward) for every pixel.
struct Heightfield {
    int width = 0;
    int height = 0;
    std::vector<Vec3> points;
    MaskMap valid;
    double focal = 0.0;

    const Vec3& at(int x, int y) const noexcept { return points[static_cast<std::size_t>(y) * width + x]; }
};

/// Orientation of the ground in camera space, used to turn azimuth and
/// elevation into a direction:
///   dir = cos(el)·(cos(az)·reference + sin(az)·side) + sin(el)·up,  side = up × reference.
/// With the default frame (camera looking along the ground) azimuth 90°
/// points away from the camera, i.e. the light sits behind the object.
struct GroundFrame {
    Vec3 up{0.0, -1.0, 0.0};
    Vec3 reference{1.0, 0.0, 0.0};
};

struct DirectionalLight {
    Vec3 direction;  // unit vector pointing toward the light
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;

    static DirectionalLight from_angles(double azimuth_deg, double elevation_deg,
                                        const GroundFrame& frame = {});
    // Same elevation, azimuth + 180°.
    DirectionalLight opposite(const GroundFrame& frame = {}) const;
};

/// Point light in the 2.5D pixel-height model, in pixels. The light's ground
/// foot is (x, y − h) and h is its height above that foot; the negative
/// light is the point reflection of this foot through the object's bottom
/// center, at the same height.
struct PointLight2D {
    double x = 0.0;
    double y = 0.0;
    double h = 1.0;
    double radius = 0.0;
};

/// Per-pixel object height above its ground contact, in pixels.
struct PixelHeightMap {
    int width = 0;
    int height = 0;
    std::vector<double> heights;

    double at(int x, int y) const noexcept { return heights[static_cast<std::size_t>(y) * width + x]; }
};

double focal_from_fov(int width, double fov_deg);

// P(x,y) = depth·K⁻¹·(x+0.5, y+0.5, 1), focal from the horizontal FOV and the
// principal point at the image center. Non-positive depth is marked invalid.
Heightfield backproject_depth(const PixelMap& depth, double fov_deg = kDefaultFovDeg);

struct ShadowMapOptions {
    // Splat radius in light-space cells; a cell is half the ground pixel footprint.
    double splat_radius = 1.5;
    // Depth bias as a fraction of the scene extent.
    double bias_fraction = 0.02;
    // Apply the final 3×3 box filter.
    bool soften = true;
};

// Hard shadow of the object layer on the ground, rasterized through an
// orthographic light-space depth buffer, then 3×3 box filtered. Object pixels
// are extruded back toward the ground surface behind them (bounded by the
// object's own 3D extent) so that silhouettes cast solid shadows.
MaskMap shadow_map_directional(const Heightfield& ground, const Heightfield& object,
                               const MaskMap& object_mask, const DirectionalLight& light,
                               const GroundFrame& frame = {}, const ShadowMapOptions& opts = {});

// h(x,y) = max(0, y_max − y − 2) inside the mask (value >= 0.5), 0 outside.
PixelHeightMap pixel_height_estimate(const MaskMap& m_obj);

// x_neg = 2x_o − x, y_neg = 2y_o − (y − h) + h, h_neg = h; x,y clamped to the image.
PointLight2D negative_light_position(const PointLight2D& light, double x_o, double y_o, int width,
                                     int height);

// Bottom-center of the object mask: mean column of the bottom row and that row.
std::array<double, 2> object_bottom_center(const MaskMap& m_obj);

// Ground foot of a point light, (x, y − h).
std::array<double, 2> light_foot(const PointLight2D& light);

// Soft shadow from a disk light of radius light.radius around the light foot.
// Each object pixel (x, y, h_p) has ground foot G = (x, y + h_p); for a light
// foot L at height h_L its shadow falls at G + (G − L)·h_p/(h_L − h_p).
// Each sample's hard shadow is splatted and closed 3×3; samples are averaged.
MaskMap soft_shadow_point_light(const MaskMap& m_obj, const PixelHeightMap& heights,
                                const PointLight2D& light, int samples = 16);

// Dark strokes (luminance < 0.5) become shadow, followed by a 3×3 close.
MaskMap ingest_scribble(const PixelMap& img);

}  // namespace spotlight
