#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spotlight {

enum class ColorSpace { linear, srgb };

/// Row-major H×W×C image. Channels are interleaved per pixel.
///
/// Linear-space images hold non-negative radiometric values; sRGB images
/// hold display-encoded values in [0,1]. The space tag travels with the data
/// so conversions happen only at I/O boundaries.
class PixelMap {
public:
    PixelMap() = default;
    PixelMap(int width, int height, int channels, ColorSpace space = ColorSpace::linear,
             double fill = 0.0);
    PixelMap(int width, int height, int channels, ColorSpace space, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    ColorSpace space() const noexcept { return space_; }
    void set_space(ColorSpace s) noexcept { space_ = s; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    double& at(int x, int y, int c) noexcept { return data_[index(x, y, c)]; }
    double at(int x, int y, int c) const noexcept { return data_[index(x, y, c)]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_dims(const PixelMap& o) const noexcept {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

    friend bool operator==(const PixelMap&, const PixelMap&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    ColorSpace space_ = ColorSpace::linear;
    std::vector<double> data_;
};

/// Single-channel map with values in [0,1].
class MaskMap {
public:
    MaskMap() = default;
    MaskMap(int width, int height, double fill = 0.0);
    MaskMap(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_dims(const MaskMap& o) const noexcept {
        return width_ == o.width_ && height_ == o.height_;
    }
    bool same_dims(const PixelMap& p) const noexcept {
        return width_ == p.width() && height_ == p.height();
    }

    // True when every value is exactly zero.
    bool all_zero() const noexcept;
    double sum() const noexcept;

    friend bool operator==(const MaskMap&, const MaskMap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// C×H×W latent tensor stored as 32-bit floats, channel-major.
class LatentTensor {
public:
    LatentTensor() = default;
    LatentTensor(int channels, int height, int width, float fill = 0.0f);
    LatentTensor(int channels, int height, int width, std::vector<float> data);

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t plane_size() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }

    float& at(int c, int y, int x) noexcept { return data_[(c * plane_size()) + y * width_ + x]; }
    float at(int c, int y, int x) const noexcept {
        return data_[(c * plane_size()) + y * width_ + x];
    }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool same_shape(const LatentTensor& o) const noexcept {
        return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
    }
    bool all_finite() const noexcept;

    friend bool operator==(const LatentTensor&, const LatentTensor&) = default;

private:
    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Named conditioning maps for the denoiser. All maps share width/height.
class IntrinsicStack {
public:
    static bool is_known_name(std::string_view name);

    // Throws InvalidArgument on unknown names, duplicate names, mismatched
    // dims, normals outside [-1,1] or negative depth.
    void add(std::string name, PixelMap map);
    // Replace an existing entry or add it.
    void set(std::string name, PixelMap map);

    const PixelMap* find(std::string_view name) const noexcept;
    bool empty() const noexcept { return entries_.empty(); }
    int width() const noexcept;
    int height() const noexcept;

    const std::vector<std::pair<std::string, PixelMap>>& entries() const noexcept {
        return entries_;
    }

private:
    void validate(const std::string& name, const PixelMap& map) const;

    std::vector<std::pair<std::string, PixelMap>> entries_;
};

}  // namespace spotlight
