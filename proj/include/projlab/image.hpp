#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "projlab/error.hpp"

namespace projlab {

/// Dense row-major RGB raster with samples in [0,1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;

  Image(int width, int height, float fill = 0.0f) : width_(width), height_(height) {
    require(width > 0 && height > 0, ErrorCode::InvalidImage,
            "image dimensions must be positive, got " + std::to_string(width) + "x" +
                std::to_string(height));
    require(std::isfinite(fill) && fill >= 0.0f && fill <= 1.0f, ErrorCode::InvalidImage,
            "fill value outside [0,1]");
    data_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
  }

  /// Takes ownership of `data`; throws InvalidImage if the length or any
  /// sample violates the invariants.
  static Image from_data(int width, int height, std::vector<float> data) {
    Image img;
    require(width > 0 && height > 0, ErrorCode::InvalidImage, "image dimensions must be positive");
    require(data.size() == static_cast<std::size_t>(width) * height * kChannels,
            ErrorCode::InvalidImage, "data length does not match dimensions");
    for (float v : data) {
      require(std::isfinite(v) && v >= 0.0f && v <= 1.0f, ErrorCode::InvalidImage,
              "sample outside [0,1]");
    }
    img.width_ = width;
    img.height_ = height;
    img.data_ = std::move(data);
    return img;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool valid() const noexcept {
    if (width_ <= 0 || height_ <= 0) return false;
    if (data_.size() != pixel_count() * kChannels) return false;
    return std::all_of(data_.begin(), data_.end(),
                       [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
  }

  friend bool operator==(const Image& a, const Image& b) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Per-pixel coverage flags. Nonzero means covered.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill ? 1 : 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(),
                                                  [](std::uint8_t v) { return v != 0; }));
  }

  friend bool operator==(const Mask& a, const Mask& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// 8-bit RGB raster.
struct QuantizedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  friend bool operator==(const QuantizedImage&, const QuantizedImage&) = default;
};

inline float clamp01(float v) noexcept { return std::clamp(v, 0.0f, 1.0f); }
inline double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

/// round(v*255) with ties away from zero, clamped to [0,255].
inline std::uint8_t quantize_sample(float v) noexcept {
  const long q = std::lround(static_cast<double>(v) * 255.0);
  return static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
}

inline QuantizedImage quantize(const Image& img) {
  QuantizedImage q{img.width(), img.height(), {}};
  q.data.reserve(img.data().size());
  for (float v : img.data()) q.data.push_back(quantize_sample(v));
  return q;
}

inline Image dequantize(const QuantizedImage& q) {
  std::vector<float> data;
  data.reserve(q.data.size());
  for (std::uint8_t v : q.data) data.push_back(static_cast<float>(v) / 255.0f);
  return Image::from_data(q.width, q.height, std::move(data));
}

/// Snaps every sample to the nearest 8-bit level.
inline Image snap_to_8bit(const Image& img) { return dequantize(quantize(img)); }

/// Luma (Rec. 601 weights) as a flat row-major vector.
inline std::vector<double> to_gray(const Image& img) {
  std::vector<double> gray(img.pixel_count());
  const auto d = img.data();
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = 0.299 * d[3 * i] + 0.587 * d[3 * i + 1] + 0.114 * d[3 * i + 2];
  }
  return gray;
}

/// Area-average resample of a grayscale plane to out_w x out_h. Each output
/// cell averages the source pixels whose centers fall inside it (or the
/// nearest pixel when the cell is smaller than a source pixel).
inline std::vector<double> resize_area(std::span<const double> gray, int w, int h, int out_w,
                                       int out_h) {
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h, 0.0);
  for (int oy = 0; oy < out_h; ++oy) {
    const int y0 = oy * h / out_h;
    const int y1 = std::max(y0 + 1, (oy + 1) * h / out_h);
    for (int ox = 0; ox < out_w; ++ox) {
      const int x0 = ox * w / out_w;
      const int x1 = std::max(x0 + 1, (ox + 1) * w / out_w);
      double sum = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) sum += gray[static_cast<std::size_t>(y) * w + x];
      out[static_cast<std::size_t>(oy) * out_w + ox] = sum / ((y1 - y0) * (x1 - x0));
    }
  }
  return out;
}

/// Separable [1 4 6 4 1]/16 smoothing with replicated borders, applied
/// `passes` times (each pass has a standard deviation of 1 pixel).
inline std::vector<double> blur_binomial(std::vector<double> gray, int w, int h, int passes = 1) {
  static constexpr std::array<double, 5> k{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
  std::vector<double> tmp(gray.size());
  for (int p = 0; p < passes; ++p) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += k[t + 2] * gray[static_cast<std::size_t>(y) * w + std::clamp(x + t, 0, w - 1)];
        tmp[static_cast<std::size_t>(y) * w + x] = s;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += k[t + 2] * tmp[static_cast<std::size_t>(std::clamp(y + t, 0, h - 1)) * w + x];
        gray[static_cast<std::size_t>(y) * w + x] = s;
      }
  }
  return gray;
}

inline Image crop(const Image& img, int x0, int y0, int w, int h) {
  require(x0 >= 0 && y0 >= 0 && w > 0 && h > 0 && x0 + w <= img.width() && y0 + h <= img.height(),
          ErrorCode::OutOfBounds, "crop rectangle exceeds image");
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
  return out;
}

}  // namespace projlab
