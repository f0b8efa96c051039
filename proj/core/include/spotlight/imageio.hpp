#pragma once

// File formats at the edge of the library: PNG (8/16-bit) for displayable
// images and masks, little-endian PFM for float maps, SHA-256 for content
// hashes. Errors raise FileError.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "spotlight/error.hpp"
#include "spotlight/image.hpp"

namespace spotlight {

class FileError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Decodes a PNG. The result is tagged sRGB unless the file declares a linear
// gamma (gAMA 1.0 without an sRGB chunk); gray+alpha is expanded to RGBA.
PixelMap read_png(const std::filesystem::path& path);

// read_png followed by conversion to linear space.
PixelMap read_png_linear(const std::filesystem::path& path);

// Encodes to sRGB (converting from linear when needed), clamps to [0,1] and
// writes an sRGB-tagged PNG. bit_depth is 8 or 16.
void write_png(const std::filesystem::path& path, const PixelMap& img, int bit_depth = 8);

// Masks are stored as raw gray values with no transfer curve. Reading a color
// file takes the Rec. 709 luma of the stored values.
MaskMap read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const MaskMap& m, int bit_depth = 8);

// PFM with 1 ("Pf") or 3 ("PF") channels; written little-endian (scale −1.0),
// bottom row first. Reading accepts either byte order. Values are linear.
PixelMap read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const PixelMap& img);
void write_pfm(const std::filesystem::path& path, const MaskMap& m);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace spotlight
