#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spotlight/error.hpp"
#include "spotlight/scheduler.hpp"

using namespace spotlight;

namespace {

double max_abs_diff(const LatentTensor& a, const LatentTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    }
    return m;
}

LatentTensor scalar(float v) { return LatentTensor(1, 1, 1, v); }

}  // namespace

TEST_CASE("schedule shape") {
    const NoiseSchedule full = NoiseSchedule::make(1000, 1000);
    REQUIRE(full.timesteps().size() == 1000);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(full.timesteps()[i] == 999 - i);
    }
    const NoiseSchedule s = NoiseSchedule::make(1000, 50);
    REQUIRE(s.timesteps().size() == 50);
    CHECK(s.timesteps().front() == 980);
    CHECK(s.timesteps().back() == 0);
    for (std::size_t i = 1; i < s.timesteps().size(); ++i) {
        CHECK(s.timesteps()[i - 1] - s.timesteps()[i] == 20);
    }
    CHECK(s.previous(49) == -1);
    CHECK(s.alpha_bar(-1) == 1.0);

    for (int train : {10, 100, 1000}) {
        const NoiseSchedule short_schedule = NoiseSchedule::make(train, 1);
        const auto& ab = short_schedule.alphas_bar();
        CHECK(ab.front() == doctest::Approx(1.0 - 0.00085).epsilon(1e-12));
        for (std::size_t i = 1; i < ab.size(); ++i) {
            REQUIRE(ab[i] < ab[i - 1]);
            REQUIRE(ab[i] > 0.0);
        }
    }
    // Last beta equals 0.012: ratio of consecutive alpha-bar.
    const auto& ab = s.alphas_bar();
    CHECK(1.0 - ab[999] / ab[998] == doctest::Approx(0.012).epsilon(1e-9));

    CHECK_THROWS_AS(NoiseSchedule::make(1000, 0), InvalidArgument);
    CHECK_THROWS_AS(NoiseSchedule::make(10, 11), InvalidArgument);
}

TEST_CASE("add_noise endpoints and scalar") {
    std::mt19937_64 rng(1);
    const LatentTensor x0 = oracle::random_latent(rng, 2, 3, 4);
    const LatentTensor eps = oracle::random_latent(rng, 2, 3, 4);
    CHECK(add_noise_ab(x0, eps, 1.0) == x0);
    CHECK(add_noise_ab(x0, eps, 0.0) == eps);
    CHECK(add_noise_ab(scalar(1.0f), scalar(0.0f), 0.25).at(0, 0, 0) == 0.5f);
    CHECK_THROWS_AS(add_noise_ab(x0, scalar(0.0f), 0.5), DimensionMismatch);
}

TEST_CASE("v conversions") {
    CHECK(v_from_ab(scalar(2.0f), scalar(0.0f), 0.5).tensor.at(0, 0, 0) ==
          doctest::Approx(-std::sqrt(0.5) * 2.0).epsilon(1e-6));

    std::mt19937_64 rng(2);
    const LatentTensor x0 = oracle::random_latent(rng, 4, 5, 6);
    const LatentTensor eps = oracle::random_latent(rng, 4, 5, 6);
    const VPrediction v1 = v_from_ab(x0, eps, 1.0);
    CHECK(max_abs_diff(v1.tensor, eps) < 1e-7);
    CHECK(x0_from_ab(x0, v1, 1.0) == x0);

    const NoiseSchedule s = NoiseSchedule::make();
    for (int t : {0, 1, 250, 500, 999}) {
        const LatentTensor xt = add_noise(s, x0, eps, t);
        const VPrediction v = v_from(s, x0, eps, t);
        CHECK(max_abs_diff(x0_from(s, xt, v, t), x0) < 1e-5);
        CHECK(max_abs_diff(eps_from(s, xt, v, t), eps) < 1e-5);
        // Defining identity x_t = √ᾱ·x0 + √(1−ᾱ)·eps from the recovered pair.
        const LatentTensor x0r = x0_from(s, xt, v, t);
        const LatentTensor er = eps_from(s, xt, v, t);
        const double ab = s.alpha_bar(t);
        for (std::size_t i = 0; i < xt.size(); ++i) {
            const double recon = std::sqrt(ab) * x0r.data()[i] + std::sqrt(1.0 - ab) * er.data()[i];
            REQUIRE(std::abs(recon - xt.data()[i]) < 1e-5);
        }
        const VPrediction ve = v_from_eps_ab(xt, eps, ab);
        CHECK(max_abs_diff(ve.tensor, v.tensor) < 1e-4);
    }
}

TEST_CASE("ddim step follows the closed-form trajectory") {
    std::mt19937_64 rng(4);
    const LatentTensor x0 = oracle::random_latent(rng, 3, 4, 4);
    const LatentTensor eps = oracle::random_latent(rng, 3, 4, 4);
    const NoiseSchedule s = NoiseSchedule::make(1000, 50);
    for (std::size_t i = 0; i < s.timesteps().size(); ++i) {
        const int t = s.timesteps()[i];
        const int tp = s.previous(i);
        const LatentTensor zt = add_noise(s, x0, eps, t);
        const LatentTensor next = ddim_step(s, zt, v_from(s, x0, eps, t), t, tp);
        const LatentTensor expect = tp < 0 ? x0 : add_noise(s, x0, eps, tp);
        REQUIRE(max_abs_diff(next, expect) < 1e-5);
        CHECK(ddim_step(s, zt, v_from(s, x0, eps, t), t, tp) == next);
    }
    const LatentTensor z = add_noise(s, x0, eps, 20);
    CHECK_THROWS_AS(ddim_step(s, z, v_from(s, x0, eps, 20), 20, 20), InvalidArgument);
    CHECK_THROWS_AS(ddim_step(s, z, v_from(s, x0, eps, 20), 20, 40), InvalidArgument);
}

TEST_CASE("full oracle-v DDIM reconstructs x0 from any start") {
    std::mt19937_64 rng(6);
    const LatentTensor x0 = oracle::random_latent(rng, 4, 8, 8);
    const LatentTensor eps = oracle::random_latent(rng, 4, 8, 8);
    const NoiseSchedule s = NoiseSchedule::make(1000, 50);
    for (std::size_t start : {std::size_t{0}, std::size_t{10}, std::size_t{30}, std::size_t{49}}) {
        LatentTensor z = add_noise(s, x0, eps, s.timesteps()[start]);
        for (std::size_t i = start; i < s.timesteps().size(); ++i) {
            const int t = s.timesteps()[i];
            const VPrediction v = v_from(s, x0, eps_from(s, z, v_from(s, x0, eps, t), t), t);
            z = ddim_step(s, z, v, t, s.previous(i));
        }
        CHECK(max_abs_diff(z, x0) <= 1e-4);
    }
}
