#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spotlight/error.hpp"
#include "spotlight/guidance.hpp"
#include "spotlight/shadowsynth.hpp"

namespace spotlight::cli {

namespace fs = std::filesystem;

class ManifestError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

enum class ShadowKind { directional, point, scribble, mask };

struct ShadowSpec {
    ShadowKind kind = ShadowKind::mask;
    double azimuth_deg = 90.0;
    double elevation_deg = 45.0;
    PointLight2D point;
    int samples = 16;
    fs::path scribble;
    fs::path mask;
    std::optional<fs::path> negative_mask;
};

struct IntrinsicRef {
    std::string name;
    fs::path path;
    std::string provenance;
};

struct GuidanceOverrides {
    std::optional<double> gamma;
    std::optional<double> beta;
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
    std::optional<NegativeMode> negative;
    std::optional<int> dilation_kernel;
};

/// A parsed scene manifest. Paths are resolved against the manifest's
/// directory.
struct Manifest {
    fs::path source;
    fs::path background;
    std::optional<fs::path> background_depth;
    double fov_deg = kDefaultFovDeg;
    GroundFrame ground;
    std::vector<IntrinsicRef> intrinsics;
    fs::path object_mask;
    std::optional<fs::path> object_albedo;
    std::optional<fs::path> object_cutout;
    std::optional<fs::path> object_depth;
    ShadowSpec shadow;
    double shadow_gain = kDefaultShadowGain;
    GuidanceOverrides guidance;

    // Every file the manifest points at, in a stable order.
    std::vector<fs::path> referenced_files() const;
};

// Parses and validates; raises ManifestError with a message naming the
// offending key. Referenced files must exist.
Manifest parse_manifest(const nlohmann::json& doc, const fs::path& base_dir);
Manifest load_manifest(const fs::path& path);

const char* to_string(NegativeMode m);
NegativeMode parse_negative_mode(const std::string& s);

}  // namespace spotlight::cli
