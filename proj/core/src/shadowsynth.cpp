#include "spotlight/shadowsynth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spotlight/error.hpp"
#include "spotlight/imagecore.hpp"

namespace spotlight {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

DirectionalLight DirectionalLight::from_angles(double azimuth_deg, double elevation_deg,
                                               const GroundFrame& frame) {
    const Vec3 up = frame.up.normalized();
    // Re-orthogonalize the reference against up.
    const Vec3 ref = (frame.reference - up * frame.reference.dot(up)).normalized();
    const Vec3 side = up.cross(ref);
    const double az = azimuth_deg * kDegToRad;
    const double el = elevation_deg * kDegToRad;
    DirectionalLight l;
    l.direction = ((ref * std::cos(az) + side * std::sin(az)) * std::cos(el) + up * std::sin(el)).normalized();
    l.azimuth_deg = azimuth_deg;
    l.elevation_deg = elevation_deg;
    return l;
}

DirectionalLight DirectionalLight::opposite(const GroundFrame& frame) const {
    double az = azimuth_deg + 180.0;
    if (az >= 360.0) {
        az -= 360.0;
    }
    return from_angles(az, elevation_deg, frame);
}

double focal_from_fov(int width, double fov_deg) {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
        throw InvalidArgument("field of view must lie in (0,180) degrees");
    }
    return width / (2.0 * std::tan(0.5 * fov_deg * kDegToRad));
}

Heightfield backproject_depth(const PixelMap& depth, double fov_deg) {
    if (depth.empty()) {
        throw InvalidArgument("empty depth map");
    }
    Heightfield hf;
    hf.width = depth.width();
    hf.height = depth.height();
    hf.focal = focal_from_fov(depth.width(), fov_deg);
    hf.points.resize(depth.pixel_count());
    hf.valid = MaskMap(depth.width(), depth.height());
    const double cx = 0.5 * depth.width();
    const double cy = 0.5 * depth.height();
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            const double d = depth.at(x, y, 0);
            if (!(d > 0.0) || !std::isfinite(d)) {
                continue;
            }
            hf.points[static_cast<std::size_t>(y) * hf.width + x] = {
                d * (x + 0.5 - cx) / hf.focal, d * (y + 0.5 - cy) / hf.focal, d};
            hf.valid.at(x, y) = 1.0;
        }
    }
    return hf;
}

namespace {

struct LightBasis {
    Vec3 u;
    Vec3 v;
    Vec3 w;  // toward the light

    double su(const Vec3& p) const noexcept { return p.dot(u); }
    double sv(const Vec3& p) const noexcept { return p.dot(v); }
    // Distance away from the light along its rays.
    double depth(const Vec3& p) const noexcept { return -p.dot(w); }
};

LightBasis light_basis(const Vec3& toward_light) {
    LightBasis b;
    b.w = toward_light.normalized();
    const Vec3 helper = std::abs(b.w.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    b.u = b.w.cross(helper).normalized();
    b.v = b.w.cross(b.u);
    return b;
}

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// 3×3 mean with the window clipped at the borders.
MaskMap box3(const MaskMap& m) {
    MaskMap out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            double acc = 0.0;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height()) {
                        acc += m.at(xx, yy);
                        ++n;
                    }
                }
            }
            out.at(x, y) = std::clamp(acc / n, 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace

MaskMap shadow_map_directional(const Heightfield& ground, const Heightfield& object,
                               const MaskMap& object_mask, const DirectionalLight& light,
                               const GroundFrame& frame, const ShadowMapOptions& opts) {
    if (ground.width != object.width || ground.height != object.height ||
        !object_mask.same_dims(ground.valid)) {
        throw DimensionMismatch("ground, object and mask must share the camera grid");
    }
    const Vec3 up = frame.up.normalized();
    const Vec3 dir = light.direction.normalized();
    if (dir.norm() == 0.0) {
        throw GeometryError("light direction is zero");
    }
    if (dir.dot(up) <= 1e-9) {
        throw GeometryError("light is at or below the horizon");
    }

    const int w = ground.width;
    const int h = ground.height;
    MaskMap shadow(w, h);

    std::vector<Vec3> object_points;
    std::vector<std::pair<Vec3, Vec3>> columns;  // (top, ground behind it)
    std::vector<double> object_spacing;
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi = -lo;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (object_mask.at(x, y) < 0.5 || object.valid.at(x, y) == 0.0) {
                continue;
            }
            const Vec3& p = object.at(x, y);
            object_points.push_back(p);
            object_spacing.push_back(p.z / object.focal);
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
            if (ground.valid.at(x, y) != 0.0) {
                columns.emplace_back(p, ground.at(x, y));
            }
        }
    }
    if (object_points.empty()) {
        return shadow;
    }

    const double cell = 0.5 * median(object_spacing);
    const double extent_cap = (hi - lo).norm();

    // Extrude each object pixel toward the surface behind it.
    std::vector<Vec3> occluders = object_points;
    for (const auto& [top, back] : columns) {
        const Vec3 d = back - top;
        const double len = std::min(d.norm(), extent_cap);
        if (len <= cell || d.dot(d) == 0.0) {
            continue;
        }
        const Vec3 step = d.normalized();
        const int n = static_cast<int>(std::ceil(len / cell));
        for (int i = 1; i <= n; ++i) {
            const Vec3 p = top + step * (len * i / n);
            occluders.push_back(p);
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
    }
    const double bias = opts.bias_fraction * (hi - lo).norm();

    const LightBasis basis = light_basis(dir);
    double umin = std::numeric_limits<double>::max();
    double vmin = umin;
    double umax = -umin;
    double vmax = -umin;
    for (const Vec3& p : occluders) {
        umin = std::min(umin, basis.su(p));
        umax = std::max(umax, basis.su(p));
        vmin = std::min(vmin, basis.sv(p));
        vmax = std::max(vmax, basis.sv(p));
    }
    const int margin = static_cast<int>(std::ceil(opts.splat_radius)) + 1;
    const double u0 = umin - margin * cell;
    const double v0 = vmin - margin * cell;
    const int gw = static_cast<int>(std::ceil((umax - umin) / cell)) + 2 * margin + 1;
    const int gh = static_cast<int>(std::ceil((vmax - vmin) / cell)) + 2 * margin + 1;
    std::vector<double> zbuf(static_cast<std::size_t>(gw) * gh, std::numeric_limits<double>::infinity());

    const double r = opts.splat_radius;
    const int ri = static_cast<int>(std::ceil(r));
    for (const Vec3& p : occluders) {
        // Cell (i,j) covers [u0 + i·cell, u0 + (i+1)·cell).
        const double fu = (basis.su(p) - u0) / cell;
        const double fv = (basis.sv(p) - v0) / cell;
        const double d = basis.depth(p);
        const int ci = static_cast<int>(std::floor(fu));
        const int cj = static_cast<int>(std::floor(fv));
        for (int j = cj - ri; j <= cj + ri; ++j) {
            for (int i = ci - ri; i <= ci + ri; ++i) {
                if (i < 0 || j < 0 || i >= gw || j >= gh) {
                    continue;
                }
                const double du = i + 0.5 - fu;
                const double dv = j + 0.5 - fv;
                if (du * du + dv * dv > r * r) {
                    continue;
                }
                double& z = zbuf[static_cast<std::size_t>(j) * gw + i];
                z = std::min(z, d);
            }
        }
    }

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (ground.valid.at(x, y) == 0.0) {
                continue;
            }
            const Vec3& g = ground.at(x, y);
            const int i = static_cast<int>(std::floor((basis.su(g) - u0) / cell));
            const int j = static_cast<int>(std::floor((basis.sv(g) - v0) / cell));
            if (i < 0 || j < 0 || i >= gw || j >= gh) {
                continue;
            }
            if (zbuf[static_cast<std::size_t>(j) * gw + i] < basis.depth(g) - bias) {
                shadow.at(x, y) = 1.0;
            }
        }
    }
    return opts.soften ? box3(shadow) : shadow;
}

PixelHeightMap pixel_height_estimate(const MaskMap& m_obj) {
    int y_max = -1;
    for (int y = 0; y < m_obj.height(); ++y) {
        for (int x = 0; x < m_obj.width(); ++x) {
            if (m_obj.at(x, y) >= 0.5) {
                y_max = std::max(y_max, y);
            }
        }
    }
    if (y_max < 0) {
        throw InvalidArgument("pixel height needs a non-empty object mask");
    }
    PixelHeightMap hm;
    hm.width = m_obj.width();
    hm.height = m_obj.height();
    hm.heights.assign(static_cast<std::size_t>(hm.width) * hm.height, 0.0);
    for (int y = 0; y < m_obj.height(); ++y) {
        for (int x = 0; x < m_obj.width(); ++x) {
            if (m_obj.at(x, y) >= 0.5) {
                hm.heights[static_cast<std::size_t>(y) * hm.width + x] = std::max(0, y_max - y - 2);
            }
        }
    }
    return hm;
}

PointLight2D negative_light_position(const PointLight2D& light, double x_o, double y_o, int width,
                                     int height) {
    PointLight2D neg = light;
    neg.x = std::clamp(2.0 * x_o - light.x, 0.0, static_cast<double>(width - 1));
    neg.y = std::clamp((2.0 * y_o - (light.y - light.h)) + light.h, 0.0, static_cast<double>(height - 1));
    neg.h = light.h;
    return neg;
}

std::array<double, 2> object_bottom_center(const MaskMap& m_obj) {
    for (int y = m_obj.height() - 1; y >= 0; --y) {
        double sum = 0.0;
        int n = 0;
        for (int x = 0; x < m_obj.width(); ++x) {
            if (m_obj.at(x, y) >= 0.5) {
                sum += x;
                ++n;
            }
        }
        if (n > 0) {
            return {sum / n, static_cast<double>(y)};
        }
    }
    throw InvalidArgument("object mask is empty");
}

std::array<double, 2> light_foot(const PointLight2D& light) { return {light.x, light.y - light.h}; }

MaskMap soft_shadow_point_light(const MaskMap& m_obj, const PixelHeightMap& heights,
                                const PointLight2D& light, int samples) {
    if (heights.width != m_obj.width() || heights.height != m_obj.height()) {
        throw DimensionMismatch("pixel heights do not match the object mask");
    }
    if (samples < 1) {
        throw InvalidArgument("soft shadow needs at least one sample");
    }
    if (!(light.radius >= 0.0)) {
        throw InvalidArgument("light radius must be >= 0");
    }
    const double max_h = *std::max_element(heights.heights.begin(), heights.heights.end());
    if (!(light.h > max_h)) {
        throw GeometryError("light height must exceed the tallest object pixel");
    }

    const int w = m_obj.width();
    const int h = m_obj.height();
    const auto [fx, fy] = light_foot(light);
    // Golden-angle spiral over the disk; radius 0 collapses it to one point.
    const int n = light.radius > 0.0 ? samples : 1;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));

    std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0);
    for (int s = 0; s < n; ++s) {
        const double rr = light.radius * std::sqrt((s + 0.5) / n);
        const double lx = fx + rr * std::cos(s * golden);
        const double ly = fy + rr * std::sin(s * golden);
        MaskMap hard(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (m_obj.at(x, y) < 0.5) {
                    continue;
                }
                const double hp = heights.at(x, y);
                const double gx = x;
                const double gy = y + hp;
                const double k = hp / (light.h - hp);
                const double sx = gx + (gx - lx) * k;
                const double sy = gy + (gy - ly) * k;
                const int px = static_cast<int>(std::floor(sx + 0.5));
                const int py = static_cast<int>(std::floor(sy + 0.5));
                if (px >= 0 && py >= 0 && px < w && py < h) {
                    hard.at(px, py) = 1.0;
                }
            }
        }
        const MaskMap closed = close_mask(hard, 3);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += closed.data()[i];
        }
    }
    for (double& v : acc) {
        v = std::clamp(v / n, 0.0, 1.0);
    }
    return MaskMap(w, h, std::move(acc));
}

MaskMap ingest_scribble(const PixelMap& img) {
    if (img.empty()) {
        throw InvalidArgument("empty scribble image");
    }
    MaskMap strokes(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            strokes.at(x, y) = luminance(img, x, y) < 0.5 ? 1.0 : 0.0;
        }
    }
    return close_mask(strokes, 3);
}

}  // namespace spotlight
