#pragma once

#include <optional>

#include "manifest.hpp"
#include "spotlight/guidance.hpp"

namespace spotlight::cli {

// Linear-space image from a PNG (sRGB decoded) or PFM. `force_rgb` drops an
// alpha channel and expands gray to three channels.
PixelMap load_linear(const fs::path& path, bool force_rgb);
MaskMap load_mask(const fs::path& path);
// Single-channel PFM depth.
PixelMap load_depth(const fs::path& path);

/// Every decoded input of a manifest, all sharing one size.
struct LoadedScene {
    Manifest manifest;
    PixelMap background;
    PixelMap albedo;
    MaskMap object_mask;
    IntrinsicStack intrinsics;
    std::optional<PixelMap> background_depth;
    std::optional<PixelMap> object_depth;
    std::optional<PixelMap> scribble;
    std::optional<MaskMap> shadow_mask;
    std::optional<MaskMap> negative_mask;
};

LoadedScene load_scene(const Manifest& m);

struct ShadowPair {
    MaskMap positive;
    std::optional<MaskMap> negative;
    std::optional<DirectionalLight> light;
};

// Shadow masks for the manifest's shadow spec. Directional lights give the
// opposite-azimuth negative, point lights the reflected light position;
// scribbles have no negative. Geometry failures raise GeometryError.
ShadowPair synthesize_shadows(const LoadedScene& scene);

// max(0, n·l) replicated over three channels.
PixelMap lambert_shading(const PixelMap& normals, const Vec3& to_light);

SceneBundle make_bundle(const LoadedScene& scene, const ShadowPair& shadows, NegativeMode mode);

}  // namespace spotlight::cli
