#pragma once

#include "projlab/image.hpp"
#include "projlab/rng.hpp"

namespace projlab {

/// Square adversarial raster. It is stretched over the object's patch anchor
/// at render time; `extent` shrinks it about the anchor center (1 = full anchor).
struct Patch {
  Image raster;
  double extent = 1.0;

  int side() const noexcept { return raster.width(); }

  static Patch filled(int side, float value) { return Patch{Image(side, side, value)}; }

  friend bool operator==(const Patch&, const Patch&) = default;
};

inline Patch init_random_patch(int side, RngStream& rng) {
  require(side >= 2, ErrorCode::InvalidArgument, "patch side must be at least 2");
  Image raster(side, side);
  for (float& v : raster.data()) v = static_cast<float>(rng.uniform());
  return Patch{std::move(raster)};
}

}  // namespace projlab
