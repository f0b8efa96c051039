#include "manifest.hpp"

#include <fstream>
#include <set>

namespace spotlight::cli {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) {
        throw ManifestError(where + " must be an object");
    }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ManifestError("unknown key '" + key + "' in " + where);
        }
    }
}

double get_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        throw ManifestError(where + "." + key + " is required");
    }
    if (!j.at(key).is_number()) {
        throw ManifestError(where + "." + key + " must be a number");
    }
    return j.at(key).get<double>();
}

std::optional<double> opt_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        return std::nullopt;
    }
    return get_number(j, key, where);
}

int get_int(const json& j, const std::string& key, const std::string& where) {
    if (!j.at(key).is_number_integer()) {
        throw ManifestError(where + "." + key + " must be an integer");
    }
    return j.at(key).get<int>();
}

fs::path resolve(const fs::path& base, const json& j, const std::string& where) {
    if (!j.is_string() || j.get<std::string>().empty()) {
        throw ManifestError(where + " must be a non-empty path string");
    }
    fs::path p = j.get<std::string>();
    if (p.is_relative()) {
        p = base / p;
    }
    p = p.lexically_normal();
    if (!fs::is_regular_file(p)) {
        throw ManifestError(where + ": file not found: " + p.string());
    }
    return p;
}

std::optional<fs::path> opt_path(const fs::path& base, const json& j, const std::string& key,
                                 const std::string& where) {
    if (!j.contains(key)) {
        return std::nullopt;
    }
    return resolve(base, j.at(key), where + "." + key);
}

Vec3 get_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
        throw ManifestError(where + " must be an array of three numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ShadowSpec parse_shadow(const json& j, const fs::path& base) {
    require_object(j, "shadow");
    if (j.size() != 1) {
        throw ManifestError("shadow must contain exactly one of directional, point, scribble, mask");
    }
    ShadowSpec s;
    const auto& [key, value] = *j.items().begin();
    if (key == "directional") {
        require_object(value, "shadow.directional");
        reject_unknown(value, {"azimuth", "elevation"}, "shadow.directional");
        s.kind = ShadowKind::directional;
        s.azimuth_deg = get_number(value, "azimuth", "shadow.directional");
        s.elevation_deg = get_number(value, "elevation", "shadow.directional");
    } else if (key == "point") {
        require_object(value, "shadow.point");
        reject_unknown(value, {"x", "y", "h", "radius", "samples"}, "shadow.point");
        s.kind = ShadowKind::point;
        s.point.x = get_number(value, "x", "shadow.point");
        s.point.y = get_number(value, "y", "shadow.point");
        s.point.h = get_number(value, "h", "shadow.point");
        s.point.radius = opt_number(value, "radius", "shadow.point").value_or(0.0);
        if (value.contains("samples")) {
            s.samples = get_int(value, "samples", "shadow.point");
        }
        if (!(s.point.h > 0.0) || !(s.point.radius >= 0.0) || s.samples < 1) {
            throw ManifestError("shadow.point needs h > 0, radius >= 0 and samples >= 1");
        }
    } else if (key == "scribble") {
        s.kind = ShadowKind::scribble;
        s.scribble = resolve(base, value, "shadow.scribble");
    } else if (key == "mask") {
        s.kind = ShadowKind::mask;
        if (value.is_object()) {
            reject_unknown(value, {"positive", "negative"}, "shadow.mask");
            if (!value.contains("positive")) {
                throw ManifestError("shadow.mask.positive is required");
            }
            s.mask = resolve(base, value.at("positive"), "shadow.mask.positive");
            s.negative_mask = opt_path(base, value, "negative", "shadow.mask");
        } else {
            s.mask = resolve(base, value, "shadow.mask");
        }
    } else {
        throw ManifestError("unknown shadow kind '" + key + "'");
    }
    return s;
}

GuidanceOverrides parse_guidance(const json& j) {
    require_object(j, "guidance");
    reject_unknown(j, {"gamma", "beta", "steps", "seed", "negative", "dilation_kernel"}, "guidance");
    GuidanceOverrides g;
    g.gamma = opt_number(j, "gamma", "guidance");
    g.beta = opt_number(j, "beta", "guidance");
    if (j.contains("steps")) {
        g.steps = get_int(j, "steps", "guidance");
    }
    if (j.contains("dilation_kernel")) {
        g.dilation_kernel = get_int(j, "dilation_kernel", "guidance");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) {
            throw ManifestError("guidance.seed must be a non-negative integer");
        }
        g.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("negative")) {
        if (!j.at("negative").is_string()) {
            throw ManifestError("guidance.negative must be a string");
        }
        try {
            g.negative = parse_negative_mode(j.at("negative").get<std::string>());
        } catch (const InvalidArgument& e) {
            throw ManifestError(std::string("guidance.negative: ") + e.what());
        }
    }
    return g;
}

}  // namespace

const char* to_string(NegativeMode m) {
    return m == NegativeMode::opposite ? "opposite" : "noshadow";
}

NegativeMode parse_negative_mode(const std::string& s) {
    if (s == "opposite") {
        return NegativeMode::opposite;
    }
    if (s == "noshadow") {
        return NegativeMode::noshadow;
    }
    throw InvalidArgument("negative mode must be 'opposite' or 'noshadow', got '" + s + "'");
}

Manifest parse_manifest(const json& doc, const fs::path& base_dir) {
    require_object(doc, "manifest");
    reject_unknown(doc,
                   {"schema", "background", "background_depth", "camera", "ground", "intrinsics", "object",
                    "shadow", "shadow_gain", "guidance", "description"},
                   "manifest");
    if (!doc.contains("schema") || !doc.at("schema").is_number_integer() || doc.at("schema").get<int>() != 1) {
        throw ManifestError("manifest schema must be 1");
    }
    Manifest m;
    if (!doc.contains("background")) {
        throw ManifestError("background is required");
    }
    m.background = resolve(base_dir, doc.at("background"), "background");
    m.background_depth = opt_path(base_dir, doc, "background_depth", "manifest");

    if (doc.contains("camera")) {
        const auto& cam = doc.at("camera");
        require_object(cam, "camera");
        reject_unknown(cam, {"fov_deg"}, "camera");
        m.fov_deg = opt_number(cam, "fov_deg", "camera").value_or(kDefaultFovDeg);
        if (!(m.fov_deg > 0.0 && m.fov_deg < 180.0)) {
            throw ManifestError("camera.fov_deg must lie in (0, 180)");
        }
    }
    if (doc.contains("ground")) {
        const auto& g = doc.at("ground");
        require_object(g, "ground");
        reject_unknown(g, {"up", "reference"}, "ground");
        if (g.contains("up")) {
            m.ground.up = get_vec3(g.at("up"), "ground.up");
        }
        if (g.contains("reference")) {
            m.ground.reference = get_vec3(g.at("reference"), "ground.reference");
        }
        if (m.ground.up.norm() == 0.0 || m.ground.up.cross(m.ground.reference).norm() < 1e-9) {
            throw ManifestError("ground.up and ground.reference must be non-zero and not parallel");
        }
    }
    if (doc.contains("intrinsics")) {
        const auto& in = doc.at("intrinsics");
        require_object(in, "intrinsics");
        for (const auto& [name, value] : in.items()) {
            if (!IntrinsicStack::is_known_name(name)) {
                throw ManifestError("unknown intrinsic channel '" + name + "'");
            }
            IntrinsicRef ref;
            ref.name = name;
            if (value.is_object()) {
                reject_unknown(value, {"path", "provenance"}, "intrinsics." + name);
                if (!value.contains("path")) {
                    throw ManifestError("intrinsics." + name + ".path is required");
                }
                ref.path = resolve(base_dir, value.at("path"), "intrinsics." + name + ".path");
                if (value.contains("provenance")) {
                    if (!value.at("provenance").is_string()) {
                        throw ManifestError("intrinsics." + name + ".provenance must be a string");
                    }
                    ref.provenance = value.at("provenance").get<std::string>();
                }
            } else {
                ref.path = resolve(base_dir, value, "intrinsics." + name);
            }
            m.intrinsics.push_back(std::move(ref));
        }
    }

    if (!doc.contains("object")) {
        throw ManifestError("object is required");
    }
    const auto& obj = doc.at("object");
    require_object(obj, "object");
    reject_unknown(obj, {"mask", "albedo", "cutout", "depth"}, "object");
    if (!obj.contains("mask")) {
        throw ManifestError("object.mask is required");
    }
    m.object_mask = resolve(base_dir, obj.at("mask"), "object.mask");
    m.object_albedo = opt_path(base_dir, obj, "albedo", "object");
    m.object_cutout = opt_path(base_dir, obj, "cutout", "object");
    m.object_depth = opt_path(base_dir, obj, "depth", "object");
    if (!m.object_albedo && !m.object_cutout) {
        throw ManifestError("object needs an albedo or a cutout");
    }

    if (!doc.contains("shadow")) {
        throw ManifestError("shadow is required");
    }
    m.shadow = parse_shadow(doc.at("shadow"), base_dir);
    if (m.shadow.kind == ShadowKind::directional && (!m.background_depth || !m.object_depth)) {
        throw ManifestError("a directional shadow needs background_depth and object.depth");
    }

    if (doc.contains("shadow_gain")) {
        m.shadow_gain = get_number(doc, "shadow_gain", "manifest");
        if (!(m.shadow_gain > 0.0 && m.shadow_gain <= 1.0)) {
            throw ManifestError("shadow_gain must lie in (0, 1]");
        }
    }
    if (doc.contains("guidance")) {
        m.guidance = parse_guidance(doc.at("guidance"));
    }
    return m;
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ManifestError("cannot open manifest " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ManifestError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    Manifest m = parse_manifest(doc, fs::absolute(path).parent_path());
    m.source = fs::absolute(path).lexically_normal();
    return m;
}

std::vector<fs::path> Manifest::referenced_files() const {
    std::vector<fs::path> out{background};
    auto add = [&](const std::optional<fs::path>& p) {
        if (p) {
            out.push_back(*p);
        }
    };
    add(background_depth);
    for (const auto& ref : intrinsics) {
        out.push_back(ref.path);
    }
    out.push_back(object_mask);
    add(object_albedo);
    add(object_cutout);
    add(object_depth);
    switch (shadow.kind) {
    case ShadowKind::scribble: out.push_back(shadow.scribble); break;
    case ShadowKind::mask:
        out.push_back(shadow.mask);
        add(shadow.negative_mask);
        break;
    default: break;
    }
    return out;
}

}  // namespace spotlight::cli
