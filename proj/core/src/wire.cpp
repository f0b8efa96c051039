#include "spotlight/wire.hpp"

#include <bit>
#include <cstring>

#include "spotlight/error.hpp"

namespace spotlight::wire {

static_assert(std::endian::native == std::endian::little,
              "wire encoding assumes a little-endian host");

std::size_t Tensor::element_count() const noexcept {
    if (dims.empty()) {
        return 0;
    }
    std::size_t n = 1;
    for (auto d : dims) {
        n *= d;
    }
    return n;
}

// --- Writer / Reader --------------------------------------------------------

namespace {

template <typename T>
void put(std::vector<std::byte>& buf, T v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

}  // namespace

void Writer::u8(std::uint8_t v) { put(buf_, v); }
void Writer::u16(std::uint16_t v) { put(buf_, v); }
void Writer::u32(std::uint32_t v) { put(buf_, v); }
void Writer::u64(std::uint64_t v) { put(buf_, v); }
void Writer::f32(float v) { put(buf_, v); }
void Writer::bytes(std::span<const std::byte> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
void Writer::str(std::string_view s) {
    const auto* p = reinterpret_cast<const std::byte*>(s.data());
    buf_.insert(buf_.end(), p, p + s.size());
}

void Writer::tensor(const Tensor& t) {
    if (t.dims.empty() || t.dims.size() > 255) {
        throw InvalidArgument("tensor must have between 1 and 255 dimensions");
    }
    if (t.data.size() != t.element_count()) {
        throw DimensionMismatch("tensor data length does not match its dims");
    }
    u8(0);
    u8(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) {
        u32(d);
    }
    const auto* p = reinterpret_cast<const std::byte*>(t.data.data());
    buf_.insert(buf_.end(), p, p + t.data.size() * sizeof(float));
}

void Reader::need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
        throw ProtocolError("payload truncated");
    }
}

namespace {

template <typename T>
T get(std::span<const std::byte> data, std::size_t& pos) {
    T v;
    std::memcpy(&v, data.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::uint8_t Reader::u8() { need(1); return get<std::uint8_t>(data_, pos_); }
std::uint16_t Reader::u16() { need(2); return get<std::uint16_t>(data_, pos_); }
std::uint32_t Reader::u32() { need(4); return get<std::uint32_t>(data_, pos_); }
std::uint64_t Reader::u64() { need(8); return get<std::uint64_t>(data_, pos_); }
float Reader::f32() { need(4); return get<float>(data_, pos_); }

std::string Reader::str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::span<const std::byte> Reader::rest() noexcept {
    auto r = data_.subspan(pos_);
    pos_ = data_.size();
    return r;
}

Tensor Reader::tensor() {
    const std::uint8_t dtype = u8();
    if (dtype != 0) {
        throw ProtocolError("unsupported tensor dtype " + std::to_string(dtype));
    }
    const std::uint8_t ndim = u8();
    if (ndim == 0) {
        throw ProtocolError("tensor with zero dimensions");
    }
    Tensor t;
    t.dims.resize(ndim);
    std::uint64_t count = 1;
    for (auto& d : t.dims) {
        d = u32();
        count *= d;
        if (count > remaining()) {
            throw ProtocolError("tensor dims exceed payload");
        }
    }
    need(count * sizeof(float));
    t.data.resize(count);
    std::memcpy(t.data.data(), data_.data() + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
    return t;
}

// --- Frames -------------------------------------------------------------------

std::vector<std::byte> encode_header(std::uint16_t msg_type, std::uint64_t payload_len) {
    Writer w;
    w.u32(kMagic);
    w.u16(kVersion);
    w.u16(msg_type);
    w.u64(payload_len);
    return w.take();
}

std::pair<std::uint16_t, std::uint64_t> decode_header(std::span<const std::byte> header) {
    if (header.size() != kHeaderBytes) {
        throw ProtocolError("frame header must be 16 bytes");
    }
    Reader r(header);
    if (r.u32() != kMagic) {
        throw ProtocolError("bad frame magic");
    }
    const auto version = r.u16();
    if (version != kVersion) {
        throw ProtocolError("unsupported protocol version " + std::to_string(version));
    }
    const auto type = r.u16();
    const auto len = r.u64();
    return {type, len};
}

std::vector<std::byte> serialize_frame(const Frame& f) {
    auto out = encode_header(f.msg_type, f.payload.size());
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

std::vector<std::byte> encode_tensor(const Tensor& t) {
    Writer w;
    w.tensor(t);
    return w.take();
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
    Reader r(bytes);
    Tensor t = r.tensor();
    if (r.remaining() != 0) {
        throw ProtocolError("trailing bytes after tensor");
    }
    return t;
}

std::vector<std::byte> encode_hello(const Hello& h) {
    Writer w;
    w.u64(h.max_frame_bytes);
    w.u32(h.capabilities);
    w.u8(h.codec_downscale);
    w.u8(h.latent_channels);
    return w.take();
}

Hello decode_hello(std::span<const std::byte> payload) {
    Reader r(payload);
    Hello h;
    h.max_frame_bytes = r.u64();
    h.capabilities = r.u32();
    h.codec_downscale = r.u8();
    h.latent_channels = r.u8();
    return h;
}

std::vector<std::byte> encode_denoise(const DenoiseRequest& req) {
    if (req.groups.size() > 255) {
        throw InvalidArgument("too many channel groups");
    }
    Writer w;
    w.tensor(req.latent);
    w.u8(static_cast<std::uint8_t>(req.groups.size()));
    for (const auto& g : req.groups) {
        if (g.name.empty() || g.name.size() > 255) {
            throw InvalidArgument("channel group name must be 1..255 bytes");
        }
        w.u8(static_cast<std::uint8_t>(g.name.size()));
        w.str(g.name);
        w.tensor(g.tensor);
    }
    w.u32(req.timestep);
    w.u8(static_cast<std::uint8_t>(req.branch));
    w.u8(static_cast<std::uint8_t>(req.kind));
    return w.take();
}

DenoiseRequest decode_denoise(std::span<const std::byte> payload) {
    Reader r(payload);
    DenoiseRequest req;
    req.latent = r.tensor();
    const auto n = r.u8();
    req.groups.reserve(n);
    for (int i = 0; i < n; ++i) {
        ChannelGroup g;
        g.name = r.str(r.u8());
        g.tensor = r.tensor();
        req.groups.push_back(std::move(g));
    }
    req.timestep = r.u32();
    const auto branch = r.u8();
    const auto kind = r.u8();
    if (branch > 1 || kind > 1) {
        throw ProtocolError("invalid branch or prediction kind");
    }
    req.branch = static_cast<Branch>(branch);
    req.kind = static_cast<PredictionKind>(kind);
    if (r.remaining() != 0) {
        throw ProtocolError("trailing bytes after DENOISE payload");
    }
    return req;
}

std::vector<std::byte> encode_error(const ErrorPayload& e) {
    Writer w;
    w.u32(e.code);
    w.str(e.message);
    return w.take();
}

ErrorPayload decode_error(std::span<const std::byte> payload) {
    Reader r(payload);
    ErrorPayload e;
    e.code = r.u32();
    e.message = r.str(r.remaining());
    return e;
}

// --- Engine type conversions ------------------------------------------------

Tensor to_wire(const LatentTensor& t) {
    Tensor w;
    w.dims = {static_cast<std::uint32_t>(t.channels()), static_cast<std::uint32_t>(t.height()),
              static_cast<std::uint32_t>(t.width())};
    w.data.assign(t.data().begin(), t.data().end());
    return w;
}

Tensor to_wire(const PixelMap& img) {
    Tensor w;
    w.dims = {static_cast<std::uint32_t>(img.channels()), static_cast<std::uint32_t>(img.height()),
              static_cast<std::uint32_t>(img.width())};
    w.data.resize(w.element_count());
    std::size_t i = 0;
    for (int c = 0; c < img.channels(); ++c) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                w.data[i++] = static_cast<float>(img.at(x, y, c));
            }
        }
    }
    return w;
}

Tensor to_wire(const MaskMap& m) {
    Tensor w;
    w.dims = {1u, static_cast<std::uint32_t>(m.height()), static_cast<std::uint32_t>(m.width())};
    w.data.reserve(w.element_count());
    for (double v : m.data()) {
        w.data.push_back(static_cast<float>(v));
    }
    return w;
}

namespace {

void expect_chw(const Tensor& t) {
    if (t.dims.size() != 3 || t.data.size() != t.element_count()) {
        throw ProtocolError("expected a [C,H,W] tensor");
    }
}

}  // namespace

LatentTensor latent_from_wire(const Tensor& t) {
    expect_chw(t);
    return LatentTensor(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]),
                        t.data);
}

PixelMap pixels_from_wire(const Tensor& t, ColorSpace space) {
    expect_chw(t);
    const int c = static_cast<int>(t.dims[0]);
    const int h = static_cast<int>(t.dims[1]);
    const int w = static_cast<int>(t.dims[2]);
    PixelMap img(w, h, c, space);
    std::size_t i = 0;
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                img.at(x, y, ch) = t.data[i++];
            }
        }
    }
    return img;
}

MaskMap mask_from_wire(const Tensor& t) {
    expect_chw(t);
    if (t.dims[0] != 1) {
        throw ProtocolError("mask tensor must have one channel");
    }
    std::vector<double> data(t.data.begin(), t.data.end());
    for (double& v : data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ProtocolError("mask values outside [0,1]");
        }
    }
    return MaskMap(static_cast<int>(t.dims[2]), static_cast<int>(t.dims[1]), std::move(data));
}

std::vector<ChannelGroup> groups_from_inputs(const BranchInputs& in) {
    std::vector<ChannelGroup> groups;
    for (const auto& [name, map] : in.intrinsics.entries()) {
        groups.push_back({name, to_wire(map)});
    }
    groups.push_back({"shadow_mask", to_wire(in.shadow_mask)});
    groups.push_back({"object_mask", to_wire(in.object_mask)});
    groups.push_back({"guidance_composite", to_wire(in.guidance_composite)});
    return groups;
}

BranchInputs inputs_from_groups(const std::vector<ChannelGroup>& groups) {
    BranchInputs in;
    for (const auto& g : groups) {
        if (g.name == "shadow_mask") {
            in.shadow_mask = mask_from_wire(g.tensor);
        } else if (g.name == "object_mask") {
            in.object_mask = mask_from_wire(g.tensor);
        } else if (g.name == "guidance_composite") {
            in.guidance_composite = pixels_from_wire(g.tensor);
        } else {
            in.intrinsics.add(g.name, pixels_from_wire(g.tensor));
        }
    }
    if (in.shadow_mask.empty() || in.object_mask.empty() || in.guidance_composite.empty()) {
        throw InvalidArgument("missing shadow_mask, object_mask or guidance_composite group");
    }
    return in;
}

}  // namespace spotlight::wire
