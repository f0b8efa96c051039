#pragma once

#include <memory>
#include <vector>

#include "spotlight/guidance.hpp"
#include "spotlight/transport.hpp"
#include "spotlight/wire.hpp"

namespace spotlight {

/// Single-stream protocol client. One request is in flight at a time and
/// responses are matched by order.
class SidecarClient {
public:
    explicit SidecarClient(std::unique_ptr<Transport> transport,
                           std::uint64_t max_frame_bytes = wire::kDefaultMaxFrameBytes);

    // Sends HELLO and records the server's capabilities. The negotiated
    // frame limit is the smaller of the two sides.
    const wire::Hello& handshake();
    bool connected() const noexcept { return handshaken_; }
    const wire::Hello& server() const noexcept { return server_; }
    std::uint64_t max_frame_bytes() const noexcept { return max_frame_bytes_; }
    bool supports(wire::MsgType t) const noexcept { return (server_.capabilities & wire::capability_bit(t)) != 0; }

    LatentTensor encode(const PixelMap& img);
    PixelMap decode(const LatentTensor& latent);
    LatentTensor denoise(const LatentTensor& z, const BranchInputs& inputs, int t, Branch branch,
                         PredictionKind kind);
    double lpips(const PixelMap& a, const PixelMap& b);

    // Sends one frame and returns the response payload. Raises RemoteError
    // on an ERROR frame and ProtocolError on framing problems; oversized
    // requests are rejected with InvalidArgument before anything is sent.
    std::vector<std::byte> call(wire::MsgType type, const std::vector<std::byte>& payload);

    void close();

private:
    wire::Tensor call_tensor(wire::MsgType type, const std::vector<std::byte>& payload);

    std::unique_ptr<Transport> transport_;
    std::uint64_t max_frame_bytes_;
    wire::Hello server_;
    bool handshaken_ = false;
    bool broken_ = false;
};

/// Presents one or more sidecar connections as Denoiser and Codec. With two
/// connections the branches are evaluated concurrently, one per connection.
class SidecarBackend final : public Denoiser, public Codec {
public:
    explicit SidecarBackend(std::vector<std::unique_ptr<SidecarClient>> clients,
                            PredictionKind kind = PredictionKind::v);

    PredictionKind prediction_kind() const noexcept override { return kind_; }
    bool reentrant() const noexcept override { return clients_.size() >= 2; }
    LatentTensor denoise(const LatentTensor& z, const BranchInputs& inputs, int t, Branch branch) override;

    int downscale() const noexcept override;
    int latent_channels() const noexcept override;
    LatentTensor encode(const PixelMap& img) override;
    PixelMap decode(const LatentTensor& latent) override;

private:
    SidecarClient& for_branch(Branch b);

    std::vector<std::unique_ptr<SidecarClient>> clients_;
    PredictionKind kind_;
};

/// Request handler for a protocol server.
class SidecarHandler {
public:
    virtual ~SidecarHandler() = default;
    virtual wire::Hello hello() const = 0;
    virtual wire::Tensor encode(const wire::Tensor& img) = 0;
    virtual wire::Tensor decode(const wire::Tensor& latent) = 0;
    virtual wire::Tensor denoise(const wire::DenoiseRequest& req) = 0;
};

// Serves one connection until the peer closes it. Every request gets exactly
// one response or ERROR frame; unadvertised messages get ERROR code 1.
void serve_connection(Transport& transport, SidecarHandler& handler);

/// Loopback handler: every tensor request returns its input tensor.
class EchoHandler final : public SidecarHandler {
public:
    wire::Hello hello() const override;
    wire::Tensor encode(const wire::Tensor& img) override { return img; }
    wire::Tensor decode(const wire::Tensor& latent) override { return latent; }
    wire::Tensor denoise(const wire::DenoiseRequest& req) override { return req.latent; }
};

/// Serves the in-process toy denoiser with the identity codec.
class ToyHandler final : public SidecarHandler {
public:
    wire::Hello hello() const override;
    wire::Tensor encode(const wire::Tensor& img) override { return img; }
    wire::Tensor decode(const wire::Tensor& latent) override { return latent; }
    wire::Tensor denoise(const wire::DenoiseRequest& req) override;
};

}  // namespace spotlight
