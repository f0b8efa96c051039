#pragma once

// Scratch directories and synthetic scenes shared by the tests.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spotlight/guidance.hpp"
#include "spotlight/shadowsynth.hpp"

namespace fixture {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const noexcept { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string read_bytes(const fs::path& p);
void write_text(const fs::path& p, const std::string& text);
// Sorted regular-file names in a directory.
std::vector<std::string> list_files(const fs::path& dir);

struct ToySceneOptions {
    int width = 48;
    int height = 40;
    std::uint64_t seed = 1;
    // point | mask | scribble | empty (positive mask all zero)
    std::string shadow = "point";
    bool with_shading = true;
};

// Writes a random scene (PNG background/albedo/masks, PFM shading) and its
// manifest into `dir`; returns the manifest path.
fs::path write_toy_scene(const fs::path& dir, const ToySceneOptions& opt);

// In-memory toy scene with a rectangular object and a rectangular shadow
// beside it. Shading maps differ between branches inside the object.
spotlight::SceneBundle make_toy_bundle(std::uint64_t seed, int width = 32, int height = 32);

/// Flat ground seen straight down from a pinhole camera, with a square box
/// standing on it under the image center.
struct BoxScene {
    int size = 128;
    double fov_deg = 50.0;
    double ground_depth = 4.0;
    double box_height = 0.4;
    double half_width = 0.3;
    spotlight::PixelMap ground_depth_map;
    spotlight::PixelMap object_depth_map;
    spotlight::MaskMap object_mask;
    spotlight::GroundFrame frame;

    double focal() const;
    double center() const { return size / 2.0; }
    // Image coordinate of a ground point at camera-space offset `world`.
    double to_pixel(double world) const { return center() + focal() * world / ground_depth; }

    // Far edge of the shadow cast by the box top, in image coordinates along
    // the axis the shadow extends on. Azimuth must be a multiple of 90°.
    double predicted_far_edge(double azimuth_deg, double elevation_deg) const;
    // The same edge read off a mask binarized at 0.5, scanning the central
    // row or column: the outer pixel boundary of the last shadowed pixel.
    double measured_far_edge(const spotlight::MaskMap& shadow, double azimuth_deg) const;
};

BoxScene make_box_scene();

// Writes the box scene (depth PFMs, mask PNG, plain background) and a
// directional-light manifest; returns the manifest path.
fs::path write_box_scene(const fs::path& dir, double azimuth, double elevation);

}  // namespace fixture
