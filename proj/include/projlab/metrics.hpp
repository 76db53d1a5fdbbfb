#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "projlab/image.hpp"

namespace projlab {

/// Difference norms on the 8-bit scale.
struct NormTriple {
  double l2 = 0.0;
  int linf = 0;
  double l0_pct = 0.0;

  friend bool operator==(const NormTriple&, const NormTriple&) = default;
};

/// l2: Euclidean norm of the integer difference vector; linf: largest channel
/// difference; l0_pct: percentage of pixels with any channel differing by at
/// least `l0_threshold` levels.
inline NormTriple norms(const QuantizedImage& a, const QuantizedImage& b, int l0_threshold = 1) {
  require(a.width == b.width && a.height == b.height && a.data.size() == b.data.size(),
          ErrorCode::DimensionMismatch, "norms: images differ in size");
  require(l0_threshold >= 1, ErrorCode::InvalidArgument, "l0_threshold must be >= 1");
  std::uint64_t sq = 0;
  int linf = 0;
  std::size_t changed = 0;
  const std::size_t pixels = a.data.size() / 3;
  for (std::size_t p = 0; p < pixels; ++p) {
    int pix_max = 0;
    for (int c = 0; c < 3; ++c) {
      const int d = std::abs(static_cast<int>(a.data[3 * p + c]) - static_cast<int>(b.data[3 * p + c]));
      sq += static_cast<std::uint64_t>(d * d);
      pix_max = std::max(pix_max, d);
    }
    linf = std::max(linf, pix_max);
    if (pix_max >= l0_threshold) ++changed;
  }
  return {std::sqrt(static_cast<double>(sq)), linf,
          pixels ? 100.0 * static_cast<double>(changed) / static_cast<double>(pixels) : 0.0};
}

inline NormTriple norms(const Image& a, const Image& b, int l0_threshold = 1) {
  require(a.same_shape(b), ErrorCode::DimensionMismatch, "norms: images differ in size");
  return norms(quantize(a), quantize(b), l0_threshold);
}

/// 100 * (clean - patched) / clean, clamped to [0, 100]. Throws CleanZero when
/// the clean object was not detected.
inline double reduction_pct(double clean_conf, double patched_conf) {
  require(clean_conf > 0.0, ErrorCode::CleanZero, "clean confidence is zero (object not detected)");
  return std::clamp(100.0 * (clean_conf - patched_conf) / clean_conf, 0.0, 100.0);
}

}  // namespace projlab
