#pragma once

#include <array>
#include <cmath>

#include "projlab/image.hpp"
#include "projlab/metrics.hpp"
#include "projlab/patch.hpp"
#include "projlab/rng.hpp"

namespace projlab {

/// Lossy digital <-> physical paths. The defaults are calibrated so that two
/// consecutive captures of a static scene differ in roughly 78% of pixels and
/// a printed patch differs from its digital source almost everywhere.
struct ChannelParams {
  double sensor_sigma = 0.0016;  ///< per-sample Gaussian std, [0,1] units
  double shot_floor = 0.0;       ///< lower bound on the std whenever sensor noise is enabled
  std::array<double, 9> print_matrix{0.9, 0.05, 0.05, 0.05, 0.9, 0.05, 0.05, 0.05, 0.9};
  double print_gamma = 1.25;
  int print_quant_levels = 32;
  std::uint64_t seed = 0x5EED;

  double effective_sigma() const { return sensor_sigma > 0.0 ? std::max(sensor_sigma, shot_floor) : 0.0; }

  /// No noise, identity print.
  static ChannelParams ideal() {
    ChannelParams p;
    p.sensor_sigma = 0.0;
    p.print_matrix = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    p.print_gamma = 1.0;
    p.print_quant_levels = 256;
    return p;
  }

  void validate() const {
    require(sensor_sigma >= 0.0 && shot_floor >= 0.0, ErrorCode::InvalidArgument,
            "sensor noise parameters must be non-negative");
    require(print_quant_levels >= 2, ErrorCode::InvalidArgument, "print_quant_levels must be >= 2");
    require(print_gamma > 0.0, ErrorCode::InvalidArgument, "print_gamma must be positive");
  }
};

/// One camera frame: independent Gaussian noise per sample, clamped.
inline Image capture(const Image& scene, const ChannelParams& params, RngStream& rng) {
  const double sigma = params.effective_sigma();
  if (sigma == 0.0) return scene;
  Image out = scene;
  for (float& v : out.data()) v = clamp01(static_cast<float>(v + sigma * rng.normal()));
  return out;
}

/// Deterministic print model: color matrix, then v^(1/gamma), then uniform
/// quantization to print_quant_levels per channel.
inline Patch print_patch(const Patch& patch, const ChannelParams& params) {
  params.validate();
  const auto& m = params.print_matrix;
  const double levels = params.print_quant_levels - 1;
  const double inv_gamma = 1.0 / params.print_gamma;
  Patch out = patch;
  Image& img = out.raster;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double r = patch.raster.at(x, y, 0), g = patch.raster.at(x, y, 1),
                   b = patch.raster.at(x, y, 2);
      for (int c = 0; c < 3; ++c) {
        double v = clamp01(m[3 * c] * r + m[3 * c + 1] * g + m[3 * c + 2] * b);
        v = std::pow(v, inv_gamma);
        v = std::round(v * levels) / levels;
        img.at(x, y, c) = static_cast<float>(clamp01(v));
      }
    }
  }
  return out;
}

inline NormTriple channel_discrepancy_report(const Image& a, const Image& b) { return norms(a, b); }

}  // namespace projlab
