#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spotlight/error.hpp"
#include "spotlight/sidecar.hpp"
#include "spotlight/toy_denoiser.hpp"

using namespace spotlight;
using wire::MsgType;

namespace {

/// Runs serve_connection on a background thread over one end of a pipe.
class LocalServer {
public:
    explicit LocalServer(std::unique_ptr<SidecarHandler> handler) : handler_(std::move(handler)) {
        auto [a, b] = make_memory_pipe(Timeout{10000});
        client_end_ = std::move(a);
        server_end_ = std::move(b);
        thread_ = std::thread([this] {
            serve_connection(*server_end_, *handler_);
            server_end_->close();
        });
    }
    ~LocalServer() {
        if (client_end_) {
            client_end_->close();
        }
        thread_.join();
    }
    std::unique_ptr<Transport> take_client() { return std::move(client_end_); }
    Transport& raw() { return *client_end_; }

private:
    std::unique_ptr<SidecarHandler> handler_;
    std::unique_ptr<Transport> client_end_;
    std::unique_ptr<Transport> server_end_;
    std::thread thread_;
};

class SmallLimitEcho final : public SidecarHandler {
public:
    wire::Hello hello() const override {
        wire::Hello h = EchoHandler().hello();
        h.max_frame_bytes = 256;
        return h;
    }
    wire::Tensor encode(const wire::Tensor& t) override { return t; }
    wire::Tensor decode(const wire::Tensor& t) override { return t; }
    wire::Tensor denoise(const wire::DenoiseRequest& r) override { return r.latent; }
};

wire::Tensor fuzz_tensor(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nd(1, 4);
    std::uniform_int_distribution<std::uint32_t> dim(1, 6);
    wire::Tensor t;
    std::size_t n = 1;
    const int ndim = nd(rng);
    for (int i = 0; i < ndim; ++i) {
        t.dims.push_back(dim(rng));
        n *= t.dims.back();
    }
    t.data.resize(n);
    for (float& v : t.data) {
        v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    }
    return t;
}

bool bit_equal(const wire::Tensor& a, const wire::Tensor& b) {
    return a.dims == b.dims && a.data.size() == b.data.size() &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

wire::ErrorPayload expect_error(Transport& t, std::uint16_t type, const std::vector<std::byte>& payload) {
    t.write_all(wire::encode_header(type, payload.size()));
    t.write_all(payload);
    std::vector<std::byte> header(wire::kHeaderBytes);
    t.read_exact(header);
    const auto [rtype, len] = wire::decode_header(header);
    std::vector<std::byte> body(len);
    t.read_exact(body);
    REQUIRE(rtype == static_cast<std::uint16_t>(MsgType::error));
    return wire::decode_error(body);
}

PixelMap to_f32(PixelMap m) {
    for (double& v : m.data()) {
        v = static_cast<float>(v);
    }
    return m;
}

// Conditioning as the wire carries it, so both sides see the same values.
BranchInputs f32_inputs(const BranchInputs& in) {
    BranchInputs out = in;
    out.guidance_composite = to_f32(in.guidance_composite);
    for (const auto& [name, map] : in.intrinsics.entries()) {
        out.intrinsics.set(name, to_f32(map));
    }
    return out;
}

void check_toy_equivalence(SidecarClient& client) {
    const SceneBundle scene = fixture::make_toy_bundle(21, 16, 16);
    ToyDenoiser toy;
    std::mt19937_64 rng(8);
    const LatentTensor z = oracle::random_latent(rng, 3, 16, 16);
    for (Branch b : {Branch::positive, Branch::negative}) {
        const BranchInputs in = f32_inputs(make_branch_inputs(scene, b, NegativeMode::opposite));
        for (int t : {999, 500, 20, 0}) {
            const double ab = toy.schedule().alpha_bar(t);
            const LatentTensor target = toy.target(in, b, 16, 16);
            for (PredictionKind kind : {PredictionKind::v, PredictionKind::eps}) {
                const LatentTensor remote = client.denoise(z, in, t, b, kind);
                REQUIRE(remote.same_shape(z));
                for (std::size_t i = 0; i < z.size(); ++i) {
                    // ε = (z − √ᾱ·T)/√(1−ᾱ), v = √ᾱ·ε − √(1−ᾱ)·T, in double.
                    const double eps = (z.data()[i] - std::sqrt(ab) * target.data()[i]) / std::sqrt(1.0 - ab);
                    const double v = std::sqrt(ab) * eps - std::sqrt(1.0 - ab) * target.data()[i];
                    const double want = kind == PredictionKind::eps ? eps : v;
                    REQUIRE(std::abs(remote.data()[i] - want) <= 1e-6 * std::max(1.0, std::abs(want)));
                }
                if (kind == PredictionKind::v) {
                    CHECK(remote == toy.denoise(z, in, t, b));
                }
            }
        }
    }
}

}  // namespace

TEST_CASE("echo server round-trips 1000 fuzzed tensors bit-exact") {
    LocalServer server(std::make_unique<EchoHandler>());
    SidecarClient client(server.take_client());
    const wire::Hello& h = client.handshake();
    CHECK(h.codec_downscale == 1);
    CHECK(client.supports(MsgType::denoise));
    CHECK_FALSE(client.supports(MsgType::metric_lpips));
    std::mt19937_64 rng(1);
    const MsgType types[] = {MsgType::encode, MsgType::decode};
    for (int i = 0; i < 1000; ++i) {
        const wire::Tensor t = fuzz_tensor(rng);
        const auto reply = client.call(types[i % 2], wire::encode_tensor(t));
        REQUIRE(bit_equal(wire::decode_tensor(reply), t));
    }
    std::mt19937_64 rng2(2);
    const LatentTensor z = oracle::random_latent(rng2, 3, 8, 8);
    const SceneBundle scene = fixture::make_toy_bundle(2, 8, 8);
    CHECK(client.denoise(z, make_branch_inputs(scene, Branch::positive, NegativeMode::opposite), 10,
                         Branch::positive, PredictionKind::v) == z);
}

TEST_CASE("toy server matches the in-process toy denoiser") {
    LocalServer server(std::make_unique<ToyHandler>());
    SidecarClient client(server.take_client());
    client.handshake();
    check_toy_equivalence(client);
}

TEST_CASE("toy server over TCP gives the same results") {
    TcpListener listener(0);
    std::jthread serve([&] {
        auto conn = listener.accept(Timeout{10000});
        ToyHandler handler;
        serve_connection(*conn, handler);
    });
    {
        SidecarClient client(connect_tcp("127.0.0.1", listener.port(), Timeout{10000}));
        client.handshake();
        check_toy_equivalence(client);
        client.close();
    }
}

TEST_CASE("sidecar backend runs the sampler like the in-process toy") {
    const SceneBundle scene = fixture::make_toy_bundle(30, 16, 16);
    GuidanceConfig cfg;
    cfg.seed = 5;
    ToyDenoiser toy;
    IdentityCodec codec;
    const SamplerResult local = run_sampler(scene, cfg, toy, codec);

    LocalServer s1(std::make_unique<ToyHandler>());
    LocalServer s2(std::make_unique<ToyHandler>());
    std::vector<std::unique_ptr<SidecarClient>> clients;
    clients.push_back(std::make_unique<SidecarClient>(s1.take_client()));
    clients.push_back(std::make_unique<SidecarClient>(s2.take_client()));
    for (auto& c : clients) {
        c->handshake();
    }
    SidecarBackend backend(std::move(clients));
    CHECK(backend.reentrant());
    CHECK(backend.downscale() == 1);
    const SamplerResult remote = run_sampler(scene, cfg, backend, backend);
    for (std::size_t i = 0; i < local.image_with.data().size(); ++i) {
        REQUIRE(std::abs(local.image_with.data()[i] - remote.image_with.data()[i]) <= 1e-6);
        REQUIRE(std::abs(local.image_without.data()[i] - remote.image_without.data()[i]) <= 1e-6);
    }
}

TEST_CASE("capability violations get ERROR frames and the stream survives") {
    LocalServer server(std::make_unique<EchoHandler>());
    Transport& t = server.raw();
    const auto lpips = expect_error(t, static_cast<std::uint16_t>(MsgType::metric_lpips), {});
    CHECK(lpips.code == 1);
    const auto unknown = expect_error(t, 0x0042, {std::byte{1}, std::byte{2}});
    CHECK(unknown.code == 1);
    const auto bad = expect_error(t, static_cast<std::uint16_t>(MsgType::encode), {std::byte{9}});
    CHECK(bad.code == 2);

    // A regular request still works afterwards.
    SidecarClient client(server.take_client());
    client.handshake();
    const wire::Tensor x{{2}, {1.0f, 2.0f}};
    CHECK(wire::decode_tensor(client.call(MsgType::encode, wire::encode_tensor(x))) == x);
    try {
        client.call(MsgType::metric_lpips, {});
        FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
        CHECK(e.code() == 1);
    }
}

TEST_CASE("oversized frames") {
    SUBCASE("server discards and answers code 4") {
        LocalServer server(std::make_unique<SmallLimitEcho>());
        Transport& t = server.raw();
        const std::vector<std::byte> big(1000, std::byte{0});
        CHECK(expect_error(t, static_cast<std::uint16_t>(MsgType::encode), big).code == 4);
        SidecarClient client(server.take_client());
        CHECK(client.handshake().max_frame_bytes == 256);
        CHECK(client.max_frame_bytes() == 256);
    }
    SUBCASE("client rejects before sending") {
        LocalServer server(std::make_unique<EchoHandler>());
        SidecarClient client(server.take_client(), 512);
        client.handshake();
        const wire::Tensor big{{400}, std::vector<float>(400, 1.0f)};
        CHECK_THROWS_AS(client.call(MsgType::encode, wire::encode_tensor(big)), InvalidArgument);
        const wire::Tensor small{{4}, {1.0f, 2.0f, 3.0f, 4.0f}};
        CHECK(wire::decode_tensor(client.call(MsgType::encode, wire::encode_tensor(small))) == small);
    }
}

TEST_CASE("bad magic closes the connection after one ERROR frame") {
    LocalServer server(std::make_unique<EchoHandler>());
    Transport& t = server.raw();
    std::vector<std::byte> junk(16, std::byte{0x41});
    t.write_all(junk);
    std::vector<std::byte> header(wire::kHeaderBytes);
    t.read_exact(header);
    const auto [type, len] = wire::decode_header(header);
    CHECK(type == static_cast<std::uint16_t>(MsgType::error));
    std::vector<std::byte> body(len);
    t.read_exact(body);
    CHECK(wire::decode_error(body).code == 2);
    std::byte more{};
    CHECK_THROWS_AS(t.read_exact(std::span(&more, 1)), TransportError);
}

TEST_CASE("transport failures") {
    CHECK_THROWS_AS(connect_address("127.0.0.1:1", Timeout{2000}), TransportError);
    CHECK_THROWS_AS(connect_address("not an address", Timeout{2000}), InvalidArgument);
    SidecarClient client([] {
        auto [a, b] = make_memory_pipe(Timeout{200});
        return std::move(a);
    }());
    CHECK_THROWS_AS(client.handshake(), TransportError);
}

TEST_CASE("calls before the handshake are refused") {
    LocalServer server(std::make_unique<EchoHandler>());
    SidecarClient client(server.take_client());
    CHECK_THROWS_AS(client.call(MsgType::encode, {}), InvalidArgument);
}
