#include "spotlight/sidecar.hpp"

#include <algorithm>

#include "spotlight/error.hpp"
#include "spotlight/toy_denoiser.hpp"

namespace spotlight {

using wire::MsgType;

SidecarClient::SidecarClient(std::unique_ptr<Transport> transport, std::uint64_t max_frame_bytes)
    : transport_(std::move(transport)), max_frame_bytes_(max_frame_bytes) {
    if (!transport_) {
        throw InvalidArgument("sidecar client needs a transport");
    }
}

const wire::Hello& SidecarClient::handshake() {
    wire::Hello mine;
    mine.max_frame_bytes = max_frame_bytes_;
    mine.capabilities = wire::capability_bit(MsgType::hello) | wire::capability_bit(MsgType::encode) |
                        wire::capability_bit(MsgType::decode) | wire::capability_bit(MsgType::denoise) |
                        wire::capability_bit(MsgType::metric_lpips);
    const auto reply = call(MsgType::hello, wire::encode_hello(mine));
    server_ = wire::decode_hello(reply);
    max_frame_bytes_ = std::min(max_frame_bytes_, server_.max_frame_bytes);
    handshaken_ = true;
    return server_;
}

std::vector<std::byte> SidecarClient::call(MsgType type, const std::vector<std::byte>& payload) {
    if (broken_) {
        throw ProtocolError("stream is desynchronized; reconnect");
    }
    if (type != MsgType::hello && !handshaken_) {
        throw InvalidArgument("HELLO handshake has not completed");
    }
    if (payload.size() + wire::kHeaderBytes > max_frame_bytes_) {
        throw InvalidArgument("frame of " + std::to_string(payload.size() + wire::kHeaderBytes) +
                              " bytes exceeds the negotiated maximum of " + std::to_string(max_frame_bytes_));
    }
    const auto header = wire::encode_header(static_cast<std::uint16_t>(type), payload.size());
    transport_->write_all(header);
    transport_->write_all(payload);

    std::vector<std::byte> reply_header(wire::kHeaderBytes);
    transport_->read_exact(reply_header);
    std::uint16_t reply_type = 0;
    std::uint64_t len = 0;
    try {
        std::tie(reply_type, len) = wire::decode_header(reply_header);
        if (len + wire::kHeaderBytes > max_frame_bytes_) {
            throw ProtocolError("response frame of " + std::to_string(len) + " bytes exceeds the limit");
        }
    } catch (const ProtocolError&) {
        broken_ = true;
        throw;
    }
    std::vector<std::byte> reply(len);
    transport_->read_exact(reply);

    const auto error_type = static_cast<std::uint16_t>(MsgType::error);
    if (reply_type == error_type || reply_type == (error_type | wire::kResponseBit)) {
        const auto err = wire::decode_error(reply);
        throw RemoteError(err.code, err.message);
    }
    if (reply_type != wire::response_of(type)) {
        broken_ = true;
        throw ProtocolError("unexpected response type " + std::to_string(reply_type));
    }
    return reply;
}

wire::Tensor SidecarClient::call_tensor(MsgType type, const std::vector<std::byte>& payload) {
    return wire::decode_tensor(call(type, payload));
}

LatentTensor SidecarClient::encode(const PixelMap& img) {
    return wire::latent_from_wire(call_tensor(MsgType::encode, wire::encode_tensor(wire::to_wire(img))));
}

PixelMap SidecarClient::decode(const LatentTensor& latent) {
    return wire::pixels_from_wire(call_tensor(MsgType::decode, wire::encode_tensor(wire::to_wire(latent))));
}

LatentTensor SidecarClient::denoise(const LatentTensor& z, const BranchInputs& inputs, int t, Branch branch,
                                    PredictionKind kind) {
    wire::DenoiseRequest req;
    req.latent = wire::to_wire(z);
    req.groups = wire::groups_from_inputs(inputs);
    req.timestep = static_cast<std::uint32_t>(t);
    req.branch = branch;
    req.kind = kind;
    LatentTensor out = wire::latent_from_wire(call_tensor(MsgType::denoise, wire::encode_denoise(req)));
    if (!out.same_shape(z)) {
        throw ProtocolError("DENOISE response shape differs from the request latent");
    }
    return out;
}

double SidecarClient::lpips(const PixelMap& a, const PixelMap& b) {
    wire::Writer w;
    w.tensor(wire::to_wire(a));
    w.tensor(wire::to_wire(b));
    const auto t = call_tensor(MsgType::metric_lpips, w.take());
    if (t.data.size() != 1) {
        throw ProtocolError("LPIPS response must hold one value");
    }
    return t.data[0];
}

void SidecarClient::close() { transport_->close(); }

// --- SidecarBackend ----------------------------------------------------------

SidecarBackend::SidecarBackend(std::vector<std::unique_ptr<SidecarClient>> clients, PredictionKind kind)
    : clients_(std::move(clients)), kind_(kind) {
    if (clients_.empty()) {
        throw InvalidArgument("sidecar backend needs at least one client");
    }
    for (auto& c : clients_) {
        if (!c->connected()) {
            c->handshake();
        }
    }
}

SidecarClient& SidecarBackend::for_branch(Branch b) {
    return clients_.size() >= 2 && b == Branch::negative ? *clients_[1] : *clients_[0];
}

LatentTensor SidecarBackend::denoise(const LatentTensor& z, const BranchInputs& inputs, int t, Branch branch) {
    return for_branch(branch).denoise(z, inputs, t, branch, kind_);
}

int SidecarBackend::downscale() const noexcept { return clients_[0]->server().codec_downscale; }
int SidecarBackend::latent_channels() const noexcept { return clients_[0]->server().latent_channels; }
LatentTensor SidecarBackend::encode(const PixelMap& img) { return clients_[0]->encode(img); }
PixelMap SidecarBackend::decode(const LatentTensor& latent) { return clients_[0]->decode(latent); }

// --- Server side ---------------------------------------------------------------

namespace {

void send_frame(Transport& t, std::uint16_t type, const std::vector<std::byte>& payload) {
    t.write_all(wire::encode_header(type, payload.size()));
    t.write_all(payload);
}

void send_error(Transport& t, wire::ErrorCode code, const std::string& message) {
    send_frame(t, static_cast<std::uint16_t>(MsgType::error),
               wire::encode_error({static_cast<std::uint32_t>(code), message}));
}

void discard(Transport& t, std::uint64_t n) {
    std::vector<std::byte> sink(64 * 1024);
    while (n > 0) {
        const auto chunk = static_cast<std::size_t>(std::min<std::uint64_t>(n, sink.size()));
        t.read_exact(std::span(sink.data(), chunk));
        n -= chunk;
    }
}

}  // namespace

void serve_connection(Transport& transport, SidecarHandler& handler) {
    const wire::Hello hello = handler.hello();
    for (;;) {
        std::vector<std::byte> header(wire::kHeaderBytes);
        try {
            transport.read_exact(header);
        } catch (const TransportError&) {
            return;  // peer went away
        }
        std::uint16_t type = 0;
        std::uint64_t len = 0;
        try {
            std::tie(type, len) = wire::decode_header(header);
        } catch (const ProtocolError& e) {
            // Framing is lost; report once and drop the connection.
            send_error(transport, wire::ErrorCode::bad_tensor, e.what());
            return;
        }
        if (len + wire::kHeaderBytes > hello.max_frame_bytes) {
            discard(transport, len);
            send_error(transport, wire::ErrorCode::frame_too_large,
                       "frame of " + std::to_string(len) + " bytes exceeds the server limit");
            continue;
        }
        std::vector<std::byte> payload(len);
        transport.read_exact(payload);

        const auto msg = static_cast<MsgType>(type);
        const bool known = type >= 1 && type <= 5;
        if (!known || (hello.capabilities & wire::capability_bit(msg)) == 0) {
            send_error(transport, wire::ErrorCode::unsupported_message,
                       "unsupported message type " + std::to_string(type));
            continue;
        }
        try {
            std::vector<std::byte> reply;
            switch (msg) {
                case MsgType::hello:
                    wire::decode_hello(payload);
                    reply = wire::encode_hello(hello);
                    break;
                case MsgType::encode:
                    reply = wire::encode_tensor(handler.encode(wire::decode_tensor(payload)));
                    break;
                case MsgType::decode:
                    reply = wire::encode_tensor(handler.decode(wire::decode_tensor(payload)));
                    break;
                case MsgType::denoise:
                    reply = wire::encode_tensor(handler.denoise(wire::decode_denoise(payload)));
                    break;
                default:
                    send_error(transport, wire::ErrorCode::unsupported_message, "not implemented");
                    continue;
            }
            send_frame(transport, wire::response_of(msg), reply);
        } catch (const ProtocolError& e) {
            send_error(transport, wire::ErrorCode::bad_tensor, e.what());
        } catch (const InvalidArgument& e) {
            send_error(transport, wire::ErrorCode::bad_tensor, e.what());
        } catch (const std::exception& e) {
            send_error(transport, wire::ErrorCode::model_failure, e.what());
        }
    }
}

namespace {

std::uint32_t base_capabilities() {
    return wire::capability_bit(MsgType::hello) | wire::capability_bit(MsgType::encode) |
           wire::capability_bit(MsgType::decode) | wire::capability_bit(MsgType::denoise);
}

}  // namespace

wire::Hello EchoHandler::hello() const {
    wire::Hello h;
    h.capabilities = base_capabilities();
    h.codec_downscale = 1;
    h.latent_channels = 3;
    return h;
}

wire::Hello ToyHandler::hello() const {
    wire::Hello h;
    h.capabilities = base_capabilities();
    h.codec_downscale = 1;
    h.latent_channels = 3;
    return h;
}

wire::Tensor ToyHandler::denoise(const wire::DenoiseRequest& req) {
    static const ToyDenoiser toy;
    const LatentTensor z = wire::latent_from_wire(req.latent);
    const BranchInputs inputs = wire::inputs_from_groups(req.groups);
    const double ab = toy.schedule().alpha_bar(static_cast<int>(req.timestep));
    const LatentTensor target = toy.target(inputs, req.branch, z.width(), z.height());
    LatentTensor v = toy_v_prediction(z, target, ab);
    if (req.kind == PredictionKind::eps) {
        return wire::to_wire(eps_from_ab(z, VPrediction{std::move(v)}, ab));
    }
    return wire::to_wire(v);
}

}  // namespace spotlight
