#include "spotlight/imageio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cerrno>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <openssl/evp.h>
#include <png.h>

#include "spotlight/imagecore.hpp"

namespace spotlight {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw FileError("cannot open " + path.string() + ": " + std::strerror(errno));
    }
    return f;
}

// Raw decoded samples normalized to [0,1].
struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    bool linear = false;
    std::vector<double> values;
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
    if (buf != nullptr) {
        *buf = msg;
    }
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

RawPng read_png_raw(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw FileError(path.string() + " is not a PNG file");
    }
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                             png_warning_handler);
    if (png == nullptr) {
        throw FileError("libpng initialization failed");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FileError("libpng initialization failed");
    }

    RawPng raw;
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    // Everything touched after setjmp lives outside this frame or is POD.
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FileError("cannot decode " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    if (depth == 16 && std::endian::native == std::endian::little) {
        png_set_swap(png);
    }
    int srgb_intent = 0;
    double gamma = 0.0;
    const bool has_srgb = png_get_sRGB(png, info, &srgb_intent) != 0;
    const bool has_gama = png_get_gAMA(png, info, &gamma) != 0;
    raw.linear = !has_srgb && has_gama && std::abs(gamma - 1.0) < 1e-3;

    png_read_update_info(png, info);
    raw.width = static_cast<int>(png_get_image_width(png, info));
    raw.height = static_cast<int>(png_get_image_height(png, info));
    raw.channels = png_get_channels(png, info);
    const int out_depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * static_cast<std::size_t>(raw.height));
    rows.resize(raw.height);
    for (int y = 0; y < raw.height; ++y) {
        rows[y] = buffer.data() + rowbytes * static_cast<std::size_t>(y);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
    raw.values.resize(n);
    if (out_depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint16_t v;
            std::memcpy(&v, buffer.data() + 2 * i, 2);
            raw.values[i] = v / 65535.0;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            raw.values[i] = buffer[i] / 255.0;
        }
    }
    return raw;
}

void write_png_raw(const std::filesystem::path& path, int width, int height, int channels,
                   const std::vector<double>& values, int bit_depth, bool srgb_tag) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw InvalidArgument("PNG bit depth must be 8 or 16");
    }
    int color = 0;
    switch (channels) {
    case 1: color = PNG_COLOR_TYPE_GRAY; break;
    case 3: color = PNG_COLOR_TYPE_RGB; break;
    case 4: color = PNG_COLOR_TYPE_RGB_ALPHA; break;
    default: throw InvalidArgument("PNG supports 1, 3 or 4 channels");
    }
    const std::size_t bytes_per = bit_depth / 8;
    const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * bytes_per;
    std::vector<png_byte> buffer(rowbytes * static_cast<std::size_t>(height));
    const double scale = bit_depth == 16 ? 65535.0 : 255.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto q = static_cast<std::uint32_t>(std::lround(std::clamp(values[i], 0.0, 1.0) * scale));
        if (bit_depth == 16) {
            buffer[2 * i] = static_cast<png_byte>(q >> 8);
            buffer[2 * i + 1] = static_cast<png_byte>(q & 0xff);
        } else {
            buffer[i] = static_cast<png_byte>(q);
        }
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = buffer.data() + rowbytes * static_cast<std::size_t>(y);
    }

    FilePtr file = open_file(path, "wb");
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                              png_warning_handler);
    if (png == nullptr) {
        throw FileError("libpng initialization failed");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw FileError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FileError("cannot encode " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    if (srgb_tag) {
        png_set_sRGB_gAMA_and_cHRM(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    } else {
        png_set_gAMA(png, info, 1.0);
    }
    // No timestamps or text chunks: identical images give identical files.
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) {
        throw FileError("cannot write " + path.string());
    }
}

}  // namespace

PixelMap read_png(const std::filesystem::path& path) {
    RawPng raw = read_png_raw(path);
    return PixelMap(raw.width, raw.height, raw.channels, raw.linear ? ColorSpace::linear : ColorSpace::srgb,
                    std::move(raw.values));
}

PixelMap read_png_linear(const std::filesystem::path& path) {
    return color_transfer(read_png(path), ColorSpace::linear);
}

void write_png(const std::filesystem::path& path, const PixelMap& img, int bit_depth) {
    const PixelMap encoded = color_transfer(img, ColorSpace::srgb);
    std::vector<double> values(encoded.data().begin(), encoded.data().end());
    write_png_raw(path, img.width(), img.height(), img.channels(), values, bit_depth, true);
}

MaskMap read_mask_png(const std::filesystem::path& path) {
    RawPng raw = read_png_raw(path);
    if (raw.channels == 1) {
        return MaskMap(raw.width, raw.height, std::move(raw.values));
    }
    const PixelMap img(raw.width, raw.height, raw.channels, ColorSpace::linear, std::move(raw.values));
    MaskMap m(raw.width, raw.height);
    for (int y = 0; y < raw.height; ++y) {
        for (int x = 0; x < raw.width; ++x) {
            m.at(x, y) = std::clamp(luminance(img, x, y), 0.0, 1.0);
        }
    }
    return m;
}

void write_mask_png(const std::filesystem::path& path, const MaskMap& m, int bit_depth) {
    std::vector<double> values(m.data().begin(), m.data().end());
    write_png_raw(path, m.width(), m.height(), 1, values, bit_depth, false);
}

// ----------------------------------------------------------------------------

PixelMap read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileError("cannot open " + path.string());
    }
    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (!in || (magic != "PF" && magic != "Pf") || width <= 0 || height <= 0 || scale == 0.0) {
        throw FileError(path.string() + " has a malformed PFM header");
    }
    in.get();  // single whitespace byte before the raster
    const int channels = magic == "PF" ? 3 : 1;
    const bool little = scale < 0.0;
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    std::vector<std::uint32_t> words(n);
    in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(n * 4));
    if (static_cast<std::size_t>(in.gcount()) != n * 4) {
        throw FileError(path.string() + " is truncated");
    }
    const bool swap = little != (std::endian::native == std::endian::little);
    std::vector<double> data(n);
    for (int y = 0; y < height; ++y) {
        // PFM stores the bottom row first.
        const std::size_t src_row = static_cast<std::size_t>(height - 1 - y) * width * channels;
        const std::size_t dst_row = static_cast<std::size_t>(y) * width * channels;
        for (std::size_t i = 0; i < static_cast<std::size_t>(width) * channels; ++i) {
            std::uint32_t w = words[src_row + i];
            if (swap) {
                w = __builtin_bswap32(w);
            }
            data[dst_row + i] = static_cast<double>(std::bit_cast<float>(w));
        }
    }
    return PixelMap(width, height, channels, ColorSpace::linear, std::move(data));
}

namespace {

void write_pfm_raw(const std::filesystem::path& path, int width, int height, int channels,
                   std::span<const double> values) {
    if (channels != 1 && channels != 3) {
        throw InvalidArgument("PFM supports 1 or 3 channels");
    }
    std::ostringstream header;
    header << (channels == 3 ? "PF" : "Pf") << '\n' << width << ' ' << height << '\n' << "-1.0\n";
    std::vector<std::uint32_t> words(values.size());
    for (int y = 0; y < height; ++y) {
        const std::size_t src_row = static_cast<std::size_t>(y) * width * channels;
        const std::size_t dst_row = static_cast<std::size_t>(height - 1 - y) * width * channels;
        for (std::size_t i = 0; i < static_cast<std::size_t>(width) * channels; ++i) {
            std::uint32_t w = std::bit_cast<std::uint32_t>(static_cast<float>(values[src_row + i]));
            if constexpr (std::endian::native == std::endian::big) {
                w = __builtin_bswap32(w);
            }
            words[dst_row + i] = w;
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FileError("cannot open " + path.string() + " for writing");
    }
    const std::string h = header.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
    if (!out) {
        throw FileError("cannot write " + path.string());
    }
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const PixelMap& img) {
    write_pfm_raw(path, img.width(), img.height(), img.channels(), img.data());
}

void write_pfm(const std::filesystem::path& path, const MaskMap& m) {
    write_pfm_raw(path, m.width(), m.height(), 1, m.data());
}

// ----------------------------------------------------------------------------

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

}  // namespace spotlight
