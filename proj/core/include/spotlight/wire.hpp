#pragma once

// Framed binary protocol (v1) between the engine and a denoiser sidecar.
//
//   frame   = magic u32 | version u16 | msg_type u16 | payload_len u64 | payload
//   tensor  = dtype u8 (0 = f32) | ndim u8 | dims u32×ndim | f32 data, row-major
//
// All integers and floats are little-endian. Responses carry the request
// type with the high bit set; ERROR frames carry code u32 + utf8 message.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spotlight/guidance.hpp"
#include "spotlight/image.hpp"

namespace spotlight::wire {

inline constexpr std::uint32_t kMagic = 0x53504C54;  // "SPLT"
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;
inline constexpr std::uint64_t kDefaultMaxFrameBytes = 256ull << 20;

enum class MsgType : std::uint16_t {
    hello = 0x0001,
    encode = 0x0002,
    decode = 0x0003,
    denoise = 0x0004,
    metric_lpips = 0x0005,
    error = 0x00FF,
};

inline constexpr std::uint16_t kResponseBit = 0x8000;

constexpr std::uint16_t response_of(MsgType t) noexcept {
    return static_cast<std::uint16_t>(static_cast<std::uint16_t>(t) | kResponseBit);
}

// Capability bit for a request type (bit n for msg_type n).
constexpr std::uint32_t capability_bit(MsgType t) noexcept {
    return 1u << static_cast<std::uint16_t>(t);
}

enum class ErrorCode : std::uint32_t {
    unsupported_message = 1,
    bad_tensor = 2,
    model_failure = 3,
    frame_too_large = 4,
};

struct Frame {
    std::uint16_t msg_type = 0;
    std::vector<std::byte> payload;
};

/// N-dimensional f32 tensor as it travels on the wire.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t element_count() const noexcept;
    friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct Hello {
    std::uint64_t max_frame_bytes = kDefaultMaxFrameBytes;
    std::uint32_t capabilities = 0;
    std::uint8_t codec_downscale = 0;
    std::uint8_t latent_channels = 0;
};

struct ChannelGroup {
    std::string name;
    Tensor tensor;
};

struct DenoiseRequest {
    Tensor latent;
    std::vector<ChannelGroup> groups;
    std::uint32_t timestep = 0;
    Branch branch = Branch::positive;
    PredictionKind kind = PredictionKind::v;
};

struct ErrorPayload {
    std::uint32_t code = 0;
    std::string message;
};

/// Appends little-endian primitives and tensors to a byte buffer.
class Writer {
public:
    void u8(std::uint8_t v);
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void bytes(std::span<const std::byte> b);
    void str(std::string_view s);
    void tensor(const Tensor& t);

    std::vector<std::byte>& buffer() noexcept { return buf_; }
    std::vector<std::byte> take() noexcept { return std::move(buf_); }

private:
    std::vector<std::byte> buf_;
};

/// Bounds-checked reader; throws ProtocolError on truncation.
class Reader {
public:
    explicit Reader(std::span<const std::byte> data) : data_(data) {}
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    std::string str(std::size_t n);
    Tensor tensor();
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    std::span<const std::byte> rest() noexcept;

private:
    void need(std::size_t n) const;
    std::span<const std::byte> data_;
    std::size_t pos_ = 0;
};

std::vector<std::byte> encode_header(std::uint16_t msg_type, std::uint64_t payload_len);
// Validates magic and version; returns (msg_type, payload_len).
std::pair<std::uint16_t, std::uint64_t> decode_header(std::span<const std::byte> header);

std::vector<std::byte> serialize_frame(const Frame& f);

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::byte> bytes);

std::vector<std::byte> encode_hello(const Hello& h);
Hello decode_hello(std::span<const std::byte> payload);

std::vector<std::byte> encode_denoise(const DenoiseRequest& r);
DenoiseRequest decode_denoise(std::span<const std::byte> payload);

std::vector<std::byte> encode_error(const ErrorPayload& e);
ErrorPayload decode_error(std::span<const std::byte> payload);

// Conversions between engine types and wire tensors. Images and masks are
// sent channel-major as [C,H,W]; latents as [C,H,W].
Tensor to_wire(const LatentTensor& t);
Tensor to_wire(const PixelMap& img);
Tensor to_wire(const MaskMap& m);
LatentTensor latent_from_wire(const Tensor& t);
PixelMap pixels_from_wire(const Tensor& t, ColorSpace space = ColorSpace::linear);
MaskMap mask_from_wire(const Tensor& t);

// Channel groups for a branch: each intrinsic plus shadow_mask, object_mask
// and guidance_composite.
std::vector<ChannelGroup> groups_from_inputs(const BranchInputs& in);
BranchInputs inputs_from_groups(const std::vector<ChannelGroup>& groups);

}  // namespace spotlight::wire
