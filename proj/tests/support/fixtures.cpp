#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spotlight/imageio.hpp"

namespace fixture {

using spotlight::ColorSpace;
using spotlight::MaskMap;
using spotlight::PixelMap;

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "spotlight-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
        throw std::runtime_error("mkdtemp failed");
    }
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::vector<std::string> list_files(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) {
            names.push_back(e.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

namespace {

struct Rect {
    int x0, y0, x1, y1;  // half-open
};

MaskMap rect_mask(int w, int h, const Rect& r) {
    MaskMap m(w, h);
    for (int y = std::max(0, r.y0); y < std::min(h, r.y1); ++y) {
        for (int x = std::max(0, r.x0); x < std::min(w, r.x1); ++x) {
            m.at(x, y) = 1.0;
        }
    }
    return m;
}

PixelMap smooth_color(std::mt19937_64& rng, int w, int h, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    const double base[3] = {u(rng), u(rng), u(rng)};
    const double gx = u(rng) - 0.5 * (lo + hi);
    const double gy = u(rng) - 0.5 * (lo + hi);
    PixelMap img(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = base[c] + 0.3 * (gx * x / w + gy * y / h);
                img.at(x, y, c) = std::clamp(v, lo, hi);
            }
        }
    }
    return img;
}

}  // namespace

fs::path write_toy_scene(const fs::path& dir, const ToySceneOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    const int w = opt.width;
    const int h = opt.height;
    std::uniform_int_distribution<int> ox(w / 4, w / 2);
    std::uniform_int_distribution<int> oy(h / 4, h / 2);
    std::uniform_int_distribution<int> size(5, 9);
    const int x0 = ox(rng);
    const int y0 = oy(rng);
    const Rect object{x0, y0, x0 + size(rng), y0 + size(rng)};

    fs::create_directories(dir);
    spotlight::write_png(dir / "background.png", smooth_color(rng, w, h, 0.2, 0.9));
    spotlight::write_png(dir / "albedo.png", smooth_color(rng, w, h, 0.1, 0.8));
    spotlight::write_mask_png(dir / "object.png", rect_mask(w, h, object));

    nlohmann::json doc;
    doc["schema"] = 1;
    doc["background"] = "background.png";
    doc["object"] = {{"mask", "object.png"}, {"albedo", "albedo.png"}};
    if (opt.with_shading) {
        PixelMap shading(w, h, 3);
        std::uniform_real_distribution<double> u(0.4, 1.0);
        for (double& v : shading.data()) {
            v = u(rng);
        }
        spotlight::write_pfm(dir / "shading.pfm", shading);
        doc["intrinsics"] = {{"shading", {{"path", "shading.pfm"}, {"provenance", "synthetic"}}}};
    }

    const int ow = object.x1 - object.x0;
    const Rect right{object.x1, object.y1 - 3, object.x1 + ow, object.y1};
    const Rect left{object.x0 - ow, object.y1 - 3, object.x0, object.y1};
    if (opt.shadow == "point") {
        std::uniform_real_distribution<double> lx(0.0, w - 1.0);
        doc["shadow"] = {{"point", {{"x", lx(rng)}, {"y", h * 0.25}, {"h", 2.0 * h}, {"radius", 1.5},
                                    {"samples", 8}}}};
    } else if (opt.shadow == "mask" || opt.shadow == "empty") {
        const MaskMap pos = opt.shadow == "empty" ? MaskMap(w, h) : rect_mask(w, h, right);
        spotlight::write_mask_png(dir / "shadow_pos.png", pos);
        spotlight::write_mask_png(dir / "shadow_neg.png", rect_mask(w, h, left));
        doc["shadow"] = {{"mask", {{"positive", "shadow_pos.png"}, {"negative", "shadow_neg.png"}}}};
    } else if (opt.shadow == "scribble") {
        PixelMap scribble(w, h, 3, ColorSpace::linear, 1.0);
        for (int x = right.x0; x < std::min(w, right.x1); ++x) {
            for (int c = 0; c < 3; ++c) {
                scribble.at(x, std::min(h - 1, object.y1 - 1), c) = 0.0;
            }
        }
        spotlight::write_png(dir / "scribble.png", scribble);
        doc["shadow"] = {{"scribble", "scribble.png"}};
    } else {
        throw std::invalid_argument("unknown shadow kind " + opt.shadow);
    }
    doc["guidance"] = {{"steps", 20}, {"seed", opt.seed}};

    const fs::path manifest = dir / "scene.json";
    write_text(manifest, doc.dump(2));
    return manifest;
}

spotlight::SceneBundle make_toy_bundle(std::uint64_t seed, int width, int height) {
    std::mt19937_64 rng(seed);
    spotlight::SceneBundle s;
    s.background = smooth_color(rng, width, height, 0.2, 0.9);
    s.albedo = smooth_color(rng, width, height, 0.1, 0.8);
    std::uniform_int_distribution<int> pos(width / 4, width / 2);
    const int x0 = pos(rng);
    const int y0 = pos(rng) * height / width;
    const Rect object{x0, y0, x0 + 7, y0 + 8};
    s.object_mask = rect_mask(width, height, object);
    s.shadow_positive = rect_mask(width, height, {object.x1, object.y1 - 3, object.x1 + 6, object.y1});
    s.shadow_negative = rect_mask(width, height, {object.x0 - 6, object.y1 - 3, object.x0, object.y1});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PixelMap sp(width, height, 3);
    PixelMap sn(width, height, 3);
    for (std::size_t i = 0; i < sp.data().size(); ++i) {
        sp.data()[i] = 0.7 + 0.3 * u(rng);
        sn.data()[i] = 0.3 + 0.3 * u(rng);
    }
    s.shading_positive = sp;
    s.shading_negative = sn;
    return s;
}

double BoxScene::focal() const { return spotlight::focal_from_fov(size, fov_deg); }

namespace {

// Shadow direction on the ground for the top-down frame: +1/−1 along x or y.
std::pair<bool, int> shadow_axis(double azimuth_deg) {
    const int quadrant = static_cast<int>(std::lround(azimuth_deg / 90.0)) % 4;
    if (std::abs(azimuth_deg - 90.0 * std::lround(azimuth_deg / 90.0)) > 1e-9) {
        throw std::invalid_argument("box oracle supports multiples of 90 degrees");
    }
    switch ((quadrant + 4) % 4) {
        case 0: return {true, -1};
        case 1: return {false, +1};
        case 2: return {true, +1};
        default: return {false, -1};
    }
}

}  // namespace

double BoxScene::predicted_far_edge(double azimuth_deg, double elevation_deg) const {
    const int sign = shadow_axis(azimuth_deg).second;
    const double el = elevation_deg * std::numbers::pi / 180.0;
    return to_pixel(sign * (half_width + box_height / std::tan(el)));
}

double BoxScene::measured_far_edge(const spotlight::MaskMap& shadow, double azimuth_deg) const {
    const auto [along_x, sign] = shadow_axis(azimuth_deg);
    const int mid = size / 2;
    int lo = size;
    int hi = -1;
    for (int i = 0; i < size; ++i) {
        const double v = along_x ? shadow.at(i, mid) : shadow.at(mid, i);
        if (v >= 0.5) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    }
    if (hi < 0) {
        return std::nan("");
    }
    return sign < 0 ? lo : hi + 1.0;
}

BoxScene make_box_scene() {
    BoxScene b;
    b.frame.up = {0.0, 0.0, -1.0};
    b.frame.reference = {1.0, 0.0, 0.0};
    const int n = b.size;
    const double f = b.focal();
    const double top = b.ground_depth - b.box_height;
    b.ground_depth_map = PixelMap(n, n, 1, ColorSpace::linear, b.ground_depth);
    b.object_depth_map = PixelMap(n, n, 1, ColorSpace::linear, 0.0);
    b.object_mask = MaskMap(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double X = top * (x + 0.5 - b.center()) / f;
            const double Y = top * (y + 0.5 - b.center()) / f;
            if (std::abs(X) <= b.half_width && std::abs(Y) <= b.half_width) {
                b.object_mask.at(x, y) = 1.0;
                b.object_depth_map.at(x, y, 0) = top;
            }
        }
    }
    return b;
}

fs::path write_box_scene(const fs::path& dir, double azimuth, double elevation) {
    const BoxScene b = make_box_scene();
    fs::create_directories(dir);
    spotlight::write_pfm(dir / "ground_depth.pfm", b.ground_depth_map);
    spotlight::write_pfm(dir / "object_depth.pfm", b.object_depth_map);
    spotlight::write_mask_png(dir / "object.png", b.object_mask);
    spotlight::write_png(dir / "background.png", PixelMap(b.size, b.size, 3, ColorSpace::linear, 0.5));
    spotlight::write_png(dir / "albedo.png", PixelMap(b.size, b.size, 3, ColorSpace::linear, 0.3));
    nlohmann::json doc;
    doc["schema"] = 1;
    doc["background"] = "background.png";
    doc["background_depth"] = "ground_depth.pfm";
    doc["camera"] = {{"fov_deg", b.fov_deg}};
    doc["ground"] = {{"up", {0.0, 0.0, -1.0}}, {"reference", {1.0, 0.0, 0.0}}};
    doc["object"] = {{"mask", "object.png"}, {"albedo", "albedo.png"}, {"depth", "object_depth.pfm"}};
    doc["shadow"] = {{"directional", {{"azimuth", azimuth}, {"elevation", elevation}}}};
    const fs::path manifest = dir / "scene.json";
    write_text(manifest, doc.dump(2));
    return manifest;
}

}  // namespace fixture
