#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "projlab/image.hpp"

namespace projlab {

/// Projective 3x3 map on continuous pixel coordinates. Pixel (i, j) covers
/// [i, i+1) x [j, j+1), so its center sits at (i + 0.5, j + 0.5).
class Homography {
 public:
  static constexpr double kMinDeterminant = 1e-12;

  Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

  /// Row-major entries. Normalized so the last entry is 1 when it is nonzero.
  explicit Homography(const std::array<double, 9>& m) : m_(m) {
    if (std::abs(m_[8]) > 0.0) {
      const double s = m_[8];
      for (double& v : m_) v /= s;
    }
  }

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty) {
    return Homography({1, 0, tx, 0, 1, ty, 0, 0, 1});
  }
  static Homography scale(double sx, double sy) { return Homography({sx, 0, 0, 0, sy, 0, 0, 0, 1}); }
  /// Rotation by `deg` degrees about (cx, cy). Positive angles turn clockwise
  /// on screen because y points down.
  static Homography rotation(double deg, double cx, double cy) {
    const double r = deg * std::numbers::pi / 180.0;
    const double c = std::cos(r), s = std::sin(r);
    return translation(cx, cy) * Homography({c, -s, 0, s, c, 0, 0, 0, 1}) *
           translation(-cx, -cy);
  }

  double operator()(int r, int c) const { return m_[static_cast<std::size_t>(r * 3 + c)]; }
  const std::array<double, 9>& entries() const noexcept { return m_; }

  double determinant() const {
    const auto& a = m_;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }

  bool invertible() const { return std::abs(determinant()) > kMinDeterminant; }

  Homography inverse() const {
    const double det = determinant();
    require(std::abs(det) > kMinDeterminant, ErrorCode::SingularHomography,
            "determinant magnitude below threshold");
    const auto& a = m_;
    std::array<double, 9> inv{
        a[4] * a[8] - a[5] * a[7], a[2] * a[7] - a[1] * a[8], a[1] * a[5] - a[2] * a[4],
        a[5] * a[6] - a[3] * a[8], a[0] * a[8] - a[2] * a[6], a[2] * a[3] - a[0] * a[5],
        a[3] * a[7] - a[4] * a[6], a[1] * a[6] - a[0] * a[7], a[0] * a[4] - a[1] * a[3]};
    for (double& v : inv) v /= det;
    return Homography(inv);
  }

  friend Homography operator*(const Homography& a, const Homography& b) {
    std::array<double, 9> r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r[i * 3 + j] += a(i, k) * b(k, j);
    return Homography(r);
  }

  /// Maps a point; returns false when it lands at infinity.
  bool apply(double x, double y, double& ox, double& oy) const {
    const double w = m_[6] * x + m_[7] * y + m_[8];
    if (std::abs(w) < 1e-15) return false;
    ox = (m_[0] * x + m_[1] * y + m_[2]) / w;
    oy = (m_[3] * x + m_[4] * y + m_[5]) / w;
    return true;
  }

 private:
  std::array<double, 9> m_;
};

struct WarpResult {
  Image image;
  Mask coverage;
};

enum class Border {
  Transparent,  ///< samples outside the source are left 0 and marked uncovered
  Replicate,    ///< edge pixels extend outward; every output pixel is covered
};

namespace detail {

inline void bilinear(const Image& src, double sx, double sy, float out[3]) {
  // sx, sy are continuous coordinates; shift to pixel-center index space.
  const double fx = std::clamp(sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
  const double fy = std::clamp(sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double ax = fx - x0, ay = fy - y0;
  for (int c = 0; c < 3; ++c) {
    const double top = src.at(x0, y0, c) * (1.0 - ax) + src.at(x1, y0, c) * ax;
    const double bot = src.at(x0, y1, c) * (1.0 - ax) + src.at(x1, y1, c) * ax;
    out[c] = clamp01(static_cast<float>(top * (1.0 - ay) + bot * ay));
  }
}

}  // namespace detail

/// Resamples `src` into an out_w x out_h raster under `src_to_dst`. Each output
/// pixel center is pulled back through the inverse map and sampled bilinearly.
inline WarpResult warp(const Image& src, const Homography& src_to_dst, int out_w, int out_h,
                       Border border = Border::Transparent) {
  require(src_to_dst.invertible(), ErrorCode::SingularHomography,
          "determinant magnitude below threshold");
  const Homography inv = src_to_dst.inverse();
  WarpResult r{Image(out_w, out_h), Mask(out_w, out_h)};
  constexpr double eps = 1e-9;
  const double w = src.width(), h = src.height();
  float px[3];
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double sx = 0, sy = 0;
      if (!inv.apply(x + 0.5, y + 0.5, sx, sy)) {
        if (border == Border::Transparent) continue;
        sx = sy = 0;
      }
      const bool inside = sx >= -eps && sy >= -eps && sx <= w + eps && sy <= h + eps;
      if (!inside && border == Border::Transparent) continue;
      detail::bilinear(src, sx, sy, px);
      for (int c = 0; c < 3; ++c) r.image.at(x, y, c) = px[c];
      r.coverage.at(x, y) = 1;
    }
  }
  return r;
}

struct PixelOrigin {
  int x = 0;
  int y = 0;
};

/// Replaces the pixels of `base` under the covered entries of `mask` with the
/// matching `overlay` pixels, with the overlay's top-left corner at `origin`.
inline Image compose(const Image& base, const Image& overlay, const Mask& mask,
                     PixelOrigin origin) {
  require(mask.width() == overlay.width() && mask.height() == overlay.height(),
          ErrorCode::DimensionMismatch, "mask and overlay dimensions differ");
  require(origin.x >= 0 && origin.y >= 0 && origin.x + overlay.width() <= base.width() &&
              origin.y + overlay.height() <= base.height(),
          ErrorCode::OutOfBounds, "overlay exceeds base extent");
  Image out = base;
  for (int y = 0; y < overlay.height(); ++y)
    for (int x = 0; x < overlay.width(); ++x)
      if (mask.at(x, y))
        for (int c = 0; c < 3; ++c) out.at(origin.x + x, origin.y + y, c) = overlay.at(x, y, c);
  return out;
}

inline Image hflip(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(img.width() - 1 - x, y, c);
  return out;
}

}  // namespace projlab
