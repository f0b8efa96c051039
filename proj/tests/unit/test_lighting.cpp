#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spotlight/error.hpp"
#include "spotlight/lighting.hpp"

using namespace spotlight;

namespace {

EnvMapParams params(const Vec3& v) {
    EnvMapParams p;
    p.c_light = {3.0, 2.0, 1.5};
    p.c_amb = {0.2, 0.3, 0.4};
    p.lambda = 300.0;
    p.v = v.normalized();
    return p;
}

// Rotation about an arbitrary axis (Rodrigues).
Vec3 rotate(const Vec3& p, const Vec3& axis, double angle) {
    const Vec3 k = axis.normalized();
    return p * std::cos(angle) + k.cross(p) * std::sin(angle) + k * (k.dot(p) * (1.0 - std::cos(angle)));
}

}  // namespace

TEST_CASE("envmap evaluation") {
    const EnvMapParams p = params({0.3, -0.8, 0.5});
    const Rgb at_v = eval_envmap(p.v, p);
    for (int c = 0; c < 3; ++c) {
        CHECK(at_v[c] == p.c_light[c] + p.c_amb[c]);
    }
    const Rgb back = eval_envmap(-p.v, p);
    for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(back[c] - p.c_amb[c]) <= 1e-12 * p.c_light[c]);
    }
    // Exponent −ln 2 halves the lobe.
    const double cosang = 1.0 - std::log(2.0) / 300.0;
    const Vec3 perp = p.v.cross({1.0, 0.0, 0.0}).normalized();
    const Vec3 omega = p.v * cosang + perp * std::sqrt(1.0 - cosang * cosang);
    const Rgb half = eval_envmap(omega, p);
    for (int c = 0; c < 3; ++c) {
        CHECK(half[c] == doctest::Approx(p.c_light[c] / 2.0 + p.c_amb[c]).epsilon(1e-9));
    }
}

TEST_CASE("envmap is rotation-equivariant") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 v = Vec3{n(rng), n(rng), n(rng)}.normalized();
        const Vec3 w = Vec3{n(rng), n(rng), n(rng)}.normalized();
        const Vec3 axis{n(rng), n(rng), n(rng)};
        const double angle = n(rng);
        EnvMapParams p = params(v);
        p.lambda = 5.0;
        EnvMapParams q = p;
        q.v = rotate(v, axis, angle);
        const Rgb a = eval_envmap(w, p);
        const Rgb b = eval_envmap(rotate(w, axis, angle), q);
        for (int c = 0; c < 3; ++c) {
            REQUIRE(std::abs(a[c] - b[c]) <= 1e-12);
        }
    }
}

TEST_CASE("spherical gaussian integral") {
    const EnvMapParams p = params({0.2, -0.9, 0.3});
    const double lambda = p.lambda;
    const double closed = 2.0 * std::numbers::pi * (1.0 - std::exp(-2.0 * lambda)) / lambda;
    for (int c = 0; c < 3; ++c) {
        const double mc = oracle::sphere_integral_mc(
            [&](double x, double y, double z) { return eval_envmap({x, y, z}, p)[c] - p.c_amb[c]; }, 200, 500,
            17 + c);
        CHECK(std::abs(mc - closed * p.c_light[c]) <= 0.02 * closed * p.c_light[c]);
    }
}

TEST_CASE("ambient and light color") {
    const Rgb c = ambient_from_background(PixelMap(4, 3, 3, ColorSpace::linear, 0.3));
    CHECK(c[0] == doctest::Approx(0.3));
    PixelMap half(4, 2, 3);
    for (int x = 0; x < 4; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
            half.at(x, 1, ch) = 1.0;
        }
    }
    CHECK(ambient_from_background(half)[1] == 0.5);
    PixelMap scaled = half;
    for (double& v : scaled.data()) {
        v *= 3.0;
    }
    CHECK(ambient_from_background(scaled)[2] == doctest::Approx(1.5));

    const Rgb red = light_color({1.0, 0.0, 0.0}, 2.0);
    CHECK(red == Rgb{2.0, 0.0, 0.0});
    const Rgb l = light_color({3.0, 4.0, 0.0}, 5.0);
    CHECK(l[0] == doctest::Approx(3.0));
    CHECK(l[1] == doctest::Approx(4.0));
    const Rgb any = light_color({0.2, 0.7, 0.1}, 6.0);
    CHECK(std::sqrt(any[0] * any[0] + any[1] * any[1] + any[2] * any[2]) == doctest::Approx(6.0));
    CHECK_THROWS_AS(light_color({0.0, 0.0, 0.0}, 6.0), InvalidArgument);

    const EnvMapParams e = make_envmap(PixelMap(4, 4, 3, ColorSpace::linear, 0.5), {0.0, -2.0, 0.0});
    CHECK(e.k == kDefaultLightRatio);
    CHECK(e.lambda == kDefaultBandwidth);
    CHECK(e.v.y == doctest::Approx(-1.0));
}

TEST_CASE("user-controlled directions") {
    const auto five = user_controlled_directions(45.0, 5);
    REQUIRE(five.size() == 5);
    for (std::size_t i = 1; i < five.size(); ++i) {
        CHECK(five[i].azimuth_deg - five[i - 1].azimuth_deg == doctest::Approx(45.0));
    }
    for (const auto& d : five) {
        CHECK(d.elevation_deg == 45.0);
    }
    const auto one = user_controlled_directions(45.0, 1);
    REQUIRE(one.size() == 1);
    const double behind = one[0].azimuth_deg;
    CHECK(five[2].azimuth_deg == behind);
    for (std::size_t i = 0; i < five.size(); ++i) {
        CHECK(five[i].azimuth_deg - behind == doctest::Approx(-(five[4 - i].azimuth_deg - behind)));
    }
    // Behind the object: the light points away from the camera (+z).
    CHECK(one[0].direction.z > 0.0);
    CHECK_THROWS_AS(user_controlled_directions(45.0, 4), InvalidArgument);
}

TEST_CASE("lat-long export") {
    EnvMapParams p = params({0.0, -1.0, 0.0});
    const PixelMap img = envmap_latlong(p, 64, 32);
    CHECK(img.width() == 64);
    // Row 0 is the zenith, where the lobe is.
    CHECK(img.at(10, 0, 0) > img.at(10, 31, 0));
    p.v = {0.0, 0.0, 1.0};
    p.lambda = 20.0;
    const PixelMap fwd = envmap_latlong(p, 64, 32);
    CHECK(fwd.at(32, 16, 0) > fwd.at(0, 16, 0));
}
