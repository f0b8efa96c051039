#include "spotlight/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "spotlight/error.hpp"

namespace spotlight {

namespace {

void check_dims(int w, int h, int c) {
    if (w <= 0 || h <= 0 || c <= 0) {
        throw InvalidArgument("image dimensions must be positive");
    }
}

}  // namespace

PixelMap::PixelMap(int width, int height, int channels, ColorSpace space, double fill)
    : width_(width), height_(height), channels_(channels), space_(space) {
    check_dims(width, height, channels);
    if (channels != 1 && channels != 3 && channels != 4) {
        throw InvalidArgument("PixelMap supports 1, 3 or 4 channels");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

PixelMap::PixelMap(int width, int height, int channels, ColorSpace space, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), space_(space), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (channels != 1 && channels != 3 && channels != 4) {
        throw InvalidArgument("PixelMap supports 1, 3 or 4 channels");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw DimensionMismatch("PixelMap data length does not match width*height*channels");
    }
}

MaskMap::MaskMap(int width, int height, double fill) : width_(width), height_(height) {
    check_dims(width, height, 1);
    if (!(fill >= 0.0 && fill <= 1.0)) {
        throw InvalidArgument("mask fill must lie in [0,1]");
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

MaskMap::MaskMap(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height, 1);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionMismatch("MaskMap data length does not match width*height");
    }
    for (double v : data_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidArgument("mask values must lie in [0,1]");
        }
    }
}

bool MaskMap::all_zero() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

double MaskMap::sum() const noexcept { return std::accumulate(data_.begin(), data_.end(), 0.0); }

LatentTensor::LatentTensor(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
    check_dims(width, height, channels);
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

LatentTensor::LatentTensor(int channels, int height, int width, std::vector<float> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
        throw DimensionMismatch("LatentTensor data length does not match channels*height*width");
    }
}

bool LatentTensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

// --- IntrinsicStack --------------------------------------------------------

namespace {
constexpr std::array<std::string_view, 7> kIntrinsicNames = {
    "albedo", "normals", "depth", "shading", "roughness", "metallic", "masked_image"};
}

bool IntrinsicStack::is_known_name(std::string_view name) {
    return std::find(kIntrinsicNames.begin(), kIntrinsicNames.end(), name) != kIntrinsicNames.end();
}

void IntrinsicStack::validate(const std::string& name, const PixelMap& map) const {
    if (!is_known_name(name)) {
        throw InvalidArgument("unknown intrinsic channel '" + name + "'");
    }
    if (map.empty()) {
        throw InvalidArgument("intrinsic '" + name + "' is empty");
    }
    if (!entries_.empty() && (map.width() != width() || map.height() != height())) {
        throw DimensionMismatch("intrinsic '" + name + "' does not match stack dimensions");
    }
    if (name == "normals") {
        for (double v : map.data()) {
            if (!(v >= -1.0 - 1e-6 && v <= 1.0 + 1e-6)) {
                throw InvalidArgument("normals must lie in [-1,1]");
            }
        }
    } else if (name == "depth") {
        for (double v : map.data()) {
            if (!(v >= 0.0)) {
                throw InvalidArgument("depth must be non-negative");
            }
        }
    }
}

void IntrinsicStack::add(std::string name, PixelMap map) {
    if (find(name) != nullptr) {
        throw InvalidArgument("duplicate intrinsic '" + name + "'");
    }
    validate(name, map);
    entries_.emplace_back(std::move(name), std::move(map));
}

void IntrinsicStack::set(std::string name, PixelMap map) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const auto& e) { return e.first == name; });
    if (it == entries_.end()) {
        add(std::move(name), std::move(map));
        return;
    }
    auto saved = std::move(*it);
    const auto pos = entries_.erase(it) - entries_.begin();
    try {
        validate(name, map);
    } catch (...) {
        entries_.insert(entries_.begin() + pos, std::move(saved));
        throw;
    }
    entries_.insert(entries_.begin() + pos, {std::move(name), std::move(map)});
}

const PixelMap* IntrinsicStack::find(std::string_view name) const noexcept {
    for (const auto& [n, m] : entries_) {
        if (n == name) {
            return &m;
        }
    }
    return nullptr;
}

int IntrinsicStack::width() const noexcept { return entries_.empty() ? 0 : entries_.front().second.width(); }
int IntrinsicStack::height() const noexcept {
    return entries_.empty() ? 0 : entries_.front().second.height();
}

}  // namespace spotlight
