#pragma once

#include <cstdint>
#include <random>

#include "spotlight/image.hpp"

namespace spotlight {

// Purposes for pre-split random substreams. Each purpose gets its own
// engine so that drawing from one never shifts another.
enum class StreamPurpose : std::uint32_t {
    init_noise = 1,
    blend_noise = 2,
    bootstrap = 3,
    simulation = 4,
    jitter = 5,
};

/// Seeded standard-normal source with a portable sequence.
///
/// mt19937_64 and seed_seq are fully specified by the standard; the normal
/// variate is produced with Box-Muller on top of raw engine bits so the
/// sequence does not depend on the standard library's distribution code.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, StreamPurpose purpose);

    double next();
    // Uniform in [0,1).
    double uniform();
    std::uint64_t next_u64() { return engine_(); }

    LatentTensor latent(int channels, int height, int width);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace spotlight
