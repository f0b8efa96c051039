#include <doctest.h>

#include <bit>
#include <cstring>
#include <random>

#include "fixtures.hpp"
#include "spotlight/error.hpp"
#include "spotlight/wire.hpp"

using namespace spotlight;
using namespace spotlight::wire;

namespace {

Tensor random_tensor(std::mt19937_64& rng, int ndim) {
    std::uniform_int_distribution<std::uint32_t> dim(1, 5);
    Tensor t;
    std::size_t n = 1;
    for (int i = 0; i < ndim; ++i) {
        t.dims.push_back(dim(rng));
        n *= t.dims.back();
    }
    // Arbitrary bit patterns excluding NaN, so operator== is meaningful.
    t.data.resize(n);
    for (float& v : t.data) {
        do {
            v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
        } while (std::isnan(v));
    }
    return t;
}

std::vector<std::byte> bytes_of(std::initializer_list<int> v) {
    std::vector<std::byte> out;
    for (int b : v) {
        out.push_back(static_cast<std::byte>(b));
    }
    return out;
}

}  // namespace

TEST_CASE("header layout is little-endian") {
    const auto h = encode_header(response_of(MsgType::denoise), 0x0102030405060708ull);
    REQUIRE(h.size() == 16);
    CHECK(h == bytes_of({0x54, 0x4C, 0x50, 0x53, 0x01, 0x00, 0x04, 0x80, 0x08, 0x07, 0x06, 0x05, 0x04, 0x03,
                         0x02, 0x01}));
    const auto [type, len] = decode_header(h);
    CHECK(type == 0x8004);
    CHECK(len == 0x0102030405060708ull);

    auto bad = h;
    bad[0] = std::byte{0};
    CHECK_THROWS_AS(decode_header(bad), ProtocolError);
    auto ver = h;
    ver[4] = std::byte{2};
    CHECK_THROWS_AS(decode_header(ver), ProtocolError);
}

TEST_CASE("tensor encoding layout") {
    Tensor t{{2, 1}, {1.0f, -2.0f}};
    CHECK(encode_tensor(t) == bytes_of({0, 2, 2, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00,
                                        0xC0}));
}

TEST_CASE("tensor round trip across ranks") {
    std::mt19937_64 rng(1);
    for (int ndim = 1; ndim <= 4; ++ndim) {
        for (int i = 0; i < 50; ++i) {
            const Tensor t = random_tensor(rng, ndim);
            const Tensor back = decode_tensor(encode_tensor(t));
            REQUIRE(back == t);
        }
    }
}

TEST_CASE("malformed tensors are rejected") {
    CHECK_THROWS_AS(decode_tensor(bytes_of({1, 1, 1, 0, 0, 0, 0, 0, 0, 0})), ProtocolError);
    CHECK_THROWS_AS(decode_tensor(bytes_of({0, 0})), ProtocolError);
    CHECK_THROWS_AS(decode_tensor(bytes_of({0, 1, 2, 0, 0, 0, 0, 0, 0, 0})), ProtocolError);
    CHECK_THROWS_AS(decode_tensor(bytes_of({0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 9})), ProtocolError);
    CHECK_THROWS_AS(decode_tensor(bytes_of({0, 1, 0xFF, 0xFF, 0xFF, 0xFF})), ProtocolError);
}

TEST_CASE("hello, error and denoise payloads") {
    Hello h{1234, 0x1E, 8, 4};
    const auto hb = encode_hello(h);
    CHECK(hb.size() == 14);
    const Hello hr = decode_hello(hb);
    CHECK(hr.max_frame_bytes == 1234);
    CHECK(hr.capabilities == 0x1E);
    CHECK(hr.codec_downscale == 8);
    CHECK(hr.latent_channels == 4);

    const ErrorPayload e = decode_error(encode_error({4, "too big"}));
    CHECK(e.code == 4);
    CHECK(e.message == "too big");

    std::mt19937_64 rng(2);
    DenoiseRequest r;
    r.latent = random_tensor(rng, 3);
    r.groups = {{"albedo", random_tensor(rng, 3)}, {"shadow_mask", random_tensor(rng, 3)}};
    r.timestep = 981;
    r.branch = Branch::negative;
    r.kind = PredictionKind::eps;
    const auto payload = encode_denoise(r);
    const DenoiseRequest back = decode_denoise(payload);
    CHECK(back.latent == r.latent);
    REQUIRE(back.groups.size() == 2);
    CHECK(back.groups[0].name == "albedo");
    CHECK(back.groups[1].tensor == r.groups[1].tensor);
    CHECK(back.timestep == 981);
    CHECK(back.branch == Branch::negative);
    CHECK(back.kind == PredictionKind::eps);

    auto trailing = payload;
    trailing.push_back(std::byte{0});
    CHECK_THROWS_AS(decode_denoise(trailing), ProtocolError);
    auto bad_branch = payload;
    bad_branch[bad_branch.size() - 2] = std::byte{7};
    CHECK_THROWS_AS(decode_denoise(bad_branch), ProtocolError);
}

TEST_CASE("engine type conversions") {
    const SceneBundle scene = fixture::make_toy_bundle(3, 8, 6);
    const BranchInputs in = make_branch_inputs(scene, Branch::positive, NegativeMode::opposite);
    const Tensor img = to_wire(in.guidance_composite);
    CHECK(img.dims == std::vector<std::uint32_t>{3, 6, 8});
    CHECK(pixels_from_wire(img).at(5, 4, 2) == doctest::Approx(in.guidance_composite.at(5, 4, 2)).epsilon(1e-6));
    CHECK(to_wire(scene.object_mask).dims == std::vector<std::uint32_t>{1, 6, 8});
    CHECK(mask_from_wire(to_wire(scene.object_mask)) == scene.object_mask);

    const BranchInputs back = inputs_from_groups(groups_from_inputs(in));
    CHECK(back.shadow_mask == in.shadow_mask);
    CHECK(back.object_mask == in.object_mask);
    REQUIRE(back.intrinsics.find("shading") != nullptr);
    CHECK(back.intrinsics.find("shading")->width() == 8);

    CHECK_THROWS_AS(inputs_from_groups({}), InvalidArgument);
    CHECK_THROWS_AS(mask_from_wire(Tensor{{1, 1, 1}, {2.0f}}), ProtocolError);
}
