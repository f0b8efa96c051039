#include "scene_loader.hpp"

#include <algorithm>

#include "spotlight/imagecore.hpp"
#include "spotlight/imageio.hpp"

namespace spotlight::cli {

namespace {

std::string lower_ext(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

PixelMap to_rgb(const PixelMap& img) {
    if (img.channels() == 3) {
        return img;
    }
    PixelMap out(img.width(), img.height(), 3, img.space());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = img.at(x, y, img.channels() == 1 ? 0 : c);
            }
        }
    }
    return out;
}

void check_size(const PixelMap& ref, int w, int h, const fs::path& path) {
    if (w != ref.width() || h != ref.height()) {
        throw ManifestError(path.string() + " is " + std::to_string(w) + "x" + std::to_string(h) +
                            ", expected " + std::to_string(ref.width()) + "x" + std::to_string(ref.height()));
    }
}

}  // namespace

PixelMap load_linear(const fs::path& path, bool force_rgb) {
    const std::string ext = lower_ext(path);
    PixelMap img;
    if (ext == ".png") {
        img = read_png_linear(path);
    } else if (ext == ".pfm") {
        img = read_pfm(path);
    } else {
        throw ManifestError(path.string() + ": unsupported image format (use .png or .pfm)");
    }
    for (double& v : img.data()) {
        if (!std::isfinite(v)) {
            throw ManifestError(path.string() + " contains non-finite values");
        }
        v = std::max(v, 0.0);
    }
    return force_rgb ? to_rgb(img) : img;
}

MaskMap load_mask(const fs::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        return read_mask_png(path);
    }
    if (ext == ".pfm") {
        const PixelMap img = read_pfm(path);
        if (img.channels() != 1) {
            throw ManifestError(path.string() + ": mask PFM must have one channel");
        }
        std::vector<double> data(img.data().begin(), img.data().end());
        for (double v : data) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ManifestError(path.string() + ": mask values must lie in [0,1]");
            }
        }
        return MaskMap(img.width(), img.height(), std::move(data));
    }
    throw ManifestError(path.string() + ": unsupported mask format (use .png or .pfm)");
}

PixelMap load_depth(const fs::path& path) {
    if (lower_ext(path) != ".pfm") {
        throw ManifestError(path.string() + ": depth maps must be PFM");
    }
    PixelMap d = read_pfm(path);
    if (d.channels() != 1) {
        throw ManifestError(path.string() + ": depth PFM must have one channel");
    }
    return d;
}

LoadedScene load_scene(const Manifest& m) {
    LoadedScene s;
    s.manifest = m;
    s.background = load_linear(m.background, true);
    const int w = s.background.width();
    const int h = s.background.height();

    s.albedo = load_linear(m.object_albedo ? *m.object_albedo : *m.object_cutout, true);
    check_size(s.background, s.albedo.width(), s.albedo.height(), m.object_albedo ? *m.object_albedo : *m.object_cutout);
    s.object_mask = load_mask(m.object_mask);
    check_size(s.background, s.object_mask.width(), s.object_mask.height(), m.object_mask);

    for (const auto& ref : m.intrinsics) {
        PixelMap map;
        const bool png = lower_ext(ref.path) == ".png";
        if (ref.name == "depth") {
            map = load_depth(ref.path);
        } else if (ref.name == "normals") {
            // PFM normals are raw; PNG normals are stored remapped to [0,1].
            map = png ? read_png(ref.path) : read_pfm(ref.path);
            if (png) {
                for (double& v : map.data()) {
                    v = 2.0 * v - 1.0;
                }
            }
            map.set_space(ColorSpace::linear);
        } else {
            map = load_linear(ref.path, false);
        }
        check_size(s.background, map.width(), map.height(), ref.path);
        try {
            s.intrinsics.add(ref.name, std::move(map));
        } catch (const InvalidArgument& e) {
            throw ManifestError(ref.path.string() + ": " + e.what());
        }
    }

    if (m.background_depth) {
        s.background_depth = load_depth(*m.background_depth);
        check_size(s.background, s.background_depth->width(), s.background_depth->height(), *m.background_depth);
    }
    if (m.object_depth) {
        s.object_depth = load_depth(*m.object_depth);
        check_size(s.background, s.object_depth->width(), s.object_depth->height(), *m.object_depth);
    }
    switch (m.shadow.kind) {
    case ShadowKind::scribble:
        s.scribble = load_linear(m.shadow.scribble, false);
        check_size(s.background, s.scribble->width(), s.scribble->height(), m.shadow.scribble);
        break;
    case ShadowKind::mask:
        s.shadow_mask = load_mask(m.shadow.mask);
        check_size(s.background, s.shadow_mask->width(), s.shadow_mask->height(), m.shadow.mask);
        if (m.shadow.negative_mask) {
            s.negative_mask = load_mask(*m.shadow.negative_mask);
            check_size(s.background, s.negative_mask->width(), s.negative_mask->height(),
                       *m.shadow.negative_mask);
        }
        break;
    default: break;
    }
    if (w <= 0 || h <= 0) {
        throw ManifestError("background is empty");
    }
    return s;
}

ShadowPair synthesize_shadows(const LoadedScene& scene) {
    const Manifest& m = scene.manifest;
    ShadowPair out;
    switch (m.shadow.kind) {
    case ShadowKind::directional: {
        const Heightfield ground = backproject_depth(*scene.background_depth, m.fov_deg);
        const Heightfield object = backproject_depth(*scene.object_depth, m.fov_deg);
        const DirectionalLight light =
            DirectionalLight::from_angles(m.shadow.azimuth_deg, m.shadow.elevation_deg, m.ground);
        out.positive = shadow_map_directional(ground, object, scene.object_mask, light, m.ground);
        out.negative = shadow_map_directional(ground, object, scene.object_mask, light.opposite(m.ground), m.ground);
        out.light = light;
        break;
    }
    case ShadowKind::point: {
        const PixelHeightMap heights = pixel_height_estimate(scene.object_mask);
        const auto [xo, yo] = object_bottom_center(scene.object_mask);
        const PointLight2D neg = negative_light_position(m.shadow.point, xo, yo, scene.background.width(),
                                                         scene.background.height());
        out.positive = soft_shadow_point_light(scene.object_mask, heights, m.shadow.point, m.shadow.samples);
        out.negative = soft_shadow_point_light(scene.object_mask, heights, neg, m.shadow.samples);
        break;
    }
    case ShadowKind::scribble:
        out.positive = ingest_scribble(*scene.scribble);
        break;
    case ShadowKind::mask:
        out.positive = *scene.shadow_mask;
        out.negative = scene.negative_mask;
        break;
    }
    return out;
}

PixelMap lambert_shading(const PixelMap& normals, const Vec3& to_light) {
    if (normals.channels() < 3) {
        throw InvalidArgument("normals need three channels");
    }
    const Vec3 l = to_light.normalized();
    PixelMap out(normals.width(), normals.height(), 3, ColorSpace::linear);
    for (int y = 0; y < normals.height(); ++y) {
        for (int x = 0; x < normals.width(); ++x) {
            const Vec3 n = Vec3{normals.at(x, y, 0), normals.at(x, y, 1), normals.at(x, y, 2)}.normalized();
            const double s = std::max(0.0, n.dot(l));
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = s;
            }
        }
    }
    return out;
}

SceneBundle make_bundle(const LoadedScene& scene, const ShadowPair& shadows, NegativeMode mode) {
    SceneBundle b;
    b.background = scene.background;
    b.albedo = scene.albedo;
    b.object_mask = scene.object_mask;
    b.intrinsics = scene.intrinsics;
    b.shadow_positive = shadows.positive;
    b.shadow_negative = shadows.negative;
    b.shadow_gain = scene.manifest.shadow_gain;
    const PixelMap* normals = scene.intrinsics.find("normals");
    if (shadows.light && normals != nullptr && scene.intrinsics.find("shading") == nullptr) {
        b.shading_positive = lambert_shading(*normals, shadows.light->direction);
        if (mode == NegativeMode::opposite) {
            b.shading_negative = lambert_shading(*normals, shadows.light->opposite(scene.manifest.ground).direction);
        }
    }
    return b;
}

}  // namespace spotlight::cli
