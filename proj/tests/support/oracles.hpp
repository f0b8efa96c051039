#pragma once

// Reference computations written independently of the library, used as
// oracles by the unit and acceptance tests.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "spotlight/image.hpp"

namespace oracle {

// Standard normal quantile by bisection on Φ(x) = erfc(−x/√2)/2.
double normal_quantile(double p);

// sRGB decode/encode written out from the piecewise definition.
double srgb_decode(double v);
double srgb_encode(double v);

// Binarize at 0.5, then take the max over the k×k window clipped at the
// borders, by direct scan.
spotlight::MaskMap dilate(const spotlight::MaskMap& m, int k);

// SSIM of two constant images: (2ab + C1)/(a² + b² + C1).
double ssim_constant(double a, double b, double k1 = 0.01);

// Monte-Carlo integral over the unit sphere of f(x, y, z) with jittered
// stratified uniform sampling: nz × nphi equal-area cells in (z, φ), one
// uniform sample per cell.
double sphere_integral_mc(const std::function<double(double, double, double)>& f, int nz, int nphi,
                          std::uint64_t seed);

// Point reflection of the light foot (x, y − h) through (xo, yo), raised
// back by h, clamped to the image.
struct Reflected {
    double x;
    double y;
    double h;
};
Reflected reflect_light(double x, double y, double h, double xo, double yo, int width, int height);

// The same reflection found by search: for a light on the pixel grid and an
// object center on the half-pixel grid, scans grid candidates for the point
// whose midpoint with the light foot is the object center. Throws if none.
Reflected reflect_light_search(int x, int y, int h, double xo, double yo, int width, int height);

double mean(const std::vector<double>& v);

spotlight::PixelMap random_image(std::mt19937_64& rng, int w, int h, int c, double lo = 0.0, double hi = 1.0);
spotlight::LatentTensor random_latent(std::mt19937_64& rng, int c, int h, int w);

}  // namespace oracle
