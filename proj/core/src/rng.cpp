#include "spotlight/rng.hpp"

#include <cmath>
#include <numbers>

namespace spotlight {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, StreamPurpose purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return std::mt19937_64(seq);
}

}  // namespace

NormalStream::NormalStream(std::uint64_t seed, StreamPurpose purpose)
    : engine_(make_engine(seed, purpose)) {}

double NormalStream::uniform() {
    // 53 random bits -> [0,1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

LatentTensor NormalStream::latent(int channels, int height, int width) {
    LatentTensor t(channels, height, width);
    for (float& v : t.data()) {
        v = static_cast<float>(next());
    }
    return t;
}

}  // namespace spotlight
