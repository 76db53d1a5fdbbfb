#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "projlab/geometry.hpp"
#include "projlab/image.hpp"
#include "projlab/patch.hpp"

namespace projlab {

enum class ObjectId { Car, StopSign, PottedPlant, Cup, Bottle };
enum class BackgroundId { Plain, Lab, Outdoor };

inline constexpr std::array<ObjectId, 5> kAllObjects{ObjectId::Car, ObjectId::StopSign,
                                                     ObjectId::PottedPlant, ObjectId::Cup,
                                                     ObjectId::Bottle};

inline std::string_view to_string(ObjectId id) {
  switch (id) {
    case ObjectId::Car: return "car";
    case ObjectId::StopSign: return "stop_sign";
    case ObjectId::PottedPlant: return "potted_plant";
    case ObjectId::Cup: return "cup";
    case ObjectId::Bottle: return "bottle";
  }
  return "?";
}

inline ObjectId parse_object(std::string_view s) {
  for (ObjectId id : kAllObjects)
    if (to_string(id) == s) return id;
  fail(ErrorCode::UnknownObject, "unknown object '" + std::string(s) + "'");
}

inline std::string_view to_string(BackgroundId id) {
  switch (id) {
    case BackgroundId::Plain: return "plain";
    case BackgroundId::Lab: return "lab";
    case BackgroundId::Outdoor: return "outdoor";
  }
  return "?";
}

inline BackgroundId parse_background(std::string_view s) {
  for (BackgroundId id : {BackgroundId::Plain, BackgroundId::Lab, BackgroundId::Outdoor})
    if (to_string(id) == s) return id;
  fail(ErrorCode::InvalidArgument, "unknown background '" + std::string(s) + "'");
}

using Rgb = std::array<double, 3>;

/// Normalized rectangle in object-texture coordinates.
struct UnitRect {
  double u0 = 0, v0 = 0, u1 = 1, v1 = 1;
};

/// Physical scene. Lighting maps are linear: ambient gain = lux / ambient_ref
/// (clamped to [0,1]); projector gain = lumens / lumens_ref * gain_max.
struct SceneConfig {
  ObjectId object = ObjectId::Car;
  double object_size_m = 0.33;  ///< object width
  Rgb surface_albedo{1.0, 1.0, 1.0};
  double ambient_lux = 100.0;
  double projector_lumens = 6000.0;
  double distance_m = 0.5;
  double angle_deg = 0.0;
  BackgroundId background = BackgroundId::Lab;
  int canvas_width = 96;
  int canvas_height = 72;
  double focal_px = 120.0;
  double gain_max = 1.5;
  double ambient_ref_lux = 400.0;
  double lumens_ref = 6000.0;

  double ambient_gain() const { return std::clamp(ambient_lux / ambient_ref_lux, 0.0, 1.0); }
  double projector_gain() const { return projector_lumens / lumens_ref * gain_max; }

  void validate() const {
    require(ambient_lux > 0, ErrorCode::InvalidArgument, "ambient_lux must be positive");
    require(projector_lumens > 0, ErrorCode::InvalidArgument, "projector_lumens must be positive");
    require(distance_m > 0, ErrorCode::InvalidArgument, "distance_m must be positive");
    require(object_size_m > 0, ErrorCode::InvalidArgument, "object_size_m must be positive");
    require(canvas_width > 0 && canvas_height > 0, ErrorCode::InvalidArgument,
            "canvas must be positive");
    require(focal_px > 0 && gain_max >= 0 && ambient_ref_lux > 0 && lumens_ref > 0,
            ErrorCode::InvalidArgument, "optics constants out of range");
    require(std::abs(angle_deg) < 80.0, ErrorCode::InvalidArgument, "angle_deg must be within +-80");
    for (double a : surface_albedo)
      require(a >= 0.0 && a <= 1.0, ErrorCode::InvalidArgument, "surface_albedo outside [0,1]");
  }
};

/// Procedural object: premultiplied albedo split into the paintable body
/// (tinted by the surface albedo) and fixed-color detail, plus coverage.
struct ObjectTemplate {
  ObjectId id{};
  double width_cm = 0, height_cm = 0;
  Image body;      ///< premultiplied body reflectance (tinted at render time)
  Image detail;    ///< premultiplied reflectance of untinted parts
  Image coverage;  ///< silhouette coverage replicated in all three channels
  UnitRect patch_anchor;
  double default_distance_m = 0.5;  ///< distance at which the object fills its reference view
};

namespace detail {

struct Texel {
  enum Kind { None, Body, Detail } kind = None;
  Rgb color{};
};

using ShapeFn = std::function<Texel(double x_cm, double y_cm)>;

inline bool in_rect(double x, double y, double x0, double y0, double x1, double y1) {
  return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}

inline bool in_circle(double x, double y, double cx, double cy, double r) {
  return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
}

inline bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double dx = (x - cx) / rx, dy = (y - cy) / ry;
  return dx * dx + dy * dy <= 1.0;
}

inline Texel body(double shade = 1.0) { return {Texel::Body, {shade, shade, shade}}; }
inline Texel detail_color(Rgb c) { return {Texel::Detail, c}; }

inline Texel car_shape(double x, double y) {
  for (double cx : {7.5, 25.5}) {
    if (in_circle(x, y, cx, 8.6, 1.0)) return detail_color({0.55, 0.55, 0.57});
    if (in_circle(x, y, cx, 8.6, 2.3)) return detail_color({0.06, 0.06, 0.06});
  }
  const bool lower = in_rect(x, y, 0.6, 3.6, 32.4, 8.8) &&
                     !((x < 1.8 || x > 31.2) && (y < 4.4 || y > 8.0) &&
                       !in_circle(x, y, x < 16 ? 1.8 : 31.2, y < 6 ? 4.8 : 7.6, 1.2));
  if (lower) {
    for (double cx : {7.5, 25.5})
      if (in_circle(x, y, cx, 8.6, 2.8)) return detail_color({0.12, 0.12, 0.12});
    if (in_rect(x, y, 31.4, 4.4, 32.4, 5.6)) return detail_color({0.95, 0.9, 0.55});
    if (in_rect(x, y, 0.6, 4.4, 1.4, 5.6)) return detail_color({0.75, 0.08, 0.08});
    if (y >= 7.6 && y <= 8.2) return detail_color({0.25, 0.25, 0.28});
    return body();
  }
  if (y >= 0.4 && y < 3.6) {
    const double t = (y - 0.4) / 3.4;
    const double xl = 10.5 + (7.0 - 10.5) * t, xr = 23.0 + (27.0 - 23.0) * t;
    if (x >= xl && x <= xr) {
      const bool window = y >= 1.0 && y <= 3.4 && x >= xl + 0.8 && x <= xr - 0.8 &&
                          !(x >= 16.4 && x <= 17.2);
      return window ? detail_color({0.18, 0.22, 0.28}) : body(0.9);
    }
  }
  return {};
}

inline Texel stop_sign_shape(double x, double y) {
  const double dx = std::abs(x - 15.0), dy = std::abs(y - 15.0);
  const double cut = 15.0 + (15.0 - 30.0 / (2.0 + std::numbers::sqrt2));
  if (dx > 15.0 || dy > 15.0 || dx + dy > cut) return {};
  if (dx > 13.6 || dy > 13.6 || dx + dy > cut - 1.9) return detail_color({0.92, 0.92, 0.92});
  // Letter blocks: S, T, O, P
  if (y >= 12.5 && y <= 18.5) {
    const double yy = y - 12.5;
    auto white = detail_color({0.93, 0.93, 0.93});
    if (x >= 5.0 && x <= 9.4) {
      const bool hole = (yy > 1.2 && yy < 2.6 && x > 6.4) || (yy > 3.4 && yy < 4.8 && x < 8.0);
      if (!hole) return white;
    }
    if (x >= 10.2 && x <= 14.4 && (yy < 1.3 || (x >= 11.7 && x <= 12.9))) return white;
    if (x >= 15.2 && x <= 19.4 && !(x > 16.5 && x < 18.1 && yy > 1.3 && yy < 4.7)) return white;
    if (x >= 20.2 && x <= 24.6) {
      const bool hole = (x > 21.5 && x < 23.3 && yy > 1.2 && yy < 2.6) || (x > 21.5 && yy > 3.8);
      if (!hole) return white;
    }
  }
  return {Texel::Body, {0.78, 0.12, 0.12}};
}

inline Texel potted_plant_shape(double x, double y) {
  if (y >= 21.0) {
    if (y <= 23.0 && x >= 2.5 && x <= 17.5) return detail_color({0.55, 0.3, 0.2});
    const double t = (y - 21.0) / 13.0;
    const double xl = 3.2 + 2.0 * t, xr = 16.8 - 2.0 * t;
    if (x >= xl && x <= xr) return {Texel::Body, {0.74, 0.45, 0.3}};
    return {};
  }
  struct Leaf {
    double cx, cy, rx, ry;
  };
  static constexpr Leaf leaves[] = {{10, 12, 4.2, 10},  {5.2, 14, 3.5, 7.5}, {14.8, 14, 3.5, 7.5},
                                    {3.0, 18, 3.0, 4.2}, {17, 18, 3.0, 4.2},  {7.5, 6, 2.6, 5.5},
                                    {12.5, 6, 2.6, 5.5}};
  for (const Leaf& l : leaves) {
    if (in_ellipse(x, y, l.cx, l.cy, l.rx, l.ry)) {
      const bool vein = std::abs(x - l.cx) < 0.35;
      return detail_color(vein ? Rgb{0.1, 0.3, 0.1} : Rgb{0.22, 0.52, 0.2});
    }
  }
  return {};
}

inline Texel cup_shape(double x, double y) {
  if (x >= 0.5 && x <= 8.0 && y >= 1.0 && y <= 11.0) {
    if (y <= 1.8) return body(0.7);
    if (x < 1.5 || x > 7.0) return body(0.82);
    if (y > 10.2) return body(0.75);
    return body();
  }
  const double r = std::hypot(x - 8.3, y - 5.6);
  if (x > 8.0 && r >= 1.1 && r <= 2.1) return body(0.85);
  return {};
}

inline Texel bottle_shape(double x, double y) {
  if (y < 2.0) return in_rect(x, y, 2.5, 0.0, 4.5, 2.0) ? detail_color({0.1, 0.2, 0.6}) : Texel{};
  if (y < 6.0) {
    const double t = (y - 2.0) / 4.0;
    if (x >= 2.5 - 2.0 * t && x <= 4.5 + 2.0 * t) return {Texel::Body, {0.55, 0.75, 0.6}};
    return {};
  }
  if (x < 0.5 || x > 6.5) return {};
  if (y >= 10.0 && y <= 16.0)
    return detail_color(y >= 12.5 && y <= 13.5 ? Rgb{0.8, 0.1, 0.1} : Rgb{0.92, 0.92, 0.9});
  return {Texel::Body, {0.55, 0.75, 0.6}};
}

struct ObjectSpec {
  double width_cm, height_cm;
  UnitRect anchor;
  double default_distance_m;
  Texel (*shape)(double, double);
};

inline ObjectSpec object_spec(ObjectId id) {
  switch (id) {
    case ObjectId::Car:
      return {33, 11, {11.0 / 33, 4.0 / 11, 22.0 / 33, 7.0 / 11}, 0.5, &car_shape};
    case ObjectId::StopSign:
      return {30, 30, {10.0 / 30, 3.8 / 30, 20.0 / 30, 11.4 / 30}, 0.75, &stop_sign_shape};
    case ObjectId::PottedPlant:
      return {20, 34, {6.0 / 20, 23.8 / 34, 14.0 / 20, 31.6 / 34}, 0.6, &potted_plant_shape};
    case ObjectId::Cup:
      return {10, 11, {2.2 / 10, 3.2 / 11, 6.4 / 10, 9.0 / 11}, 0.5, &cup_shape};
    case ObjectId::Bottle:
      return {7, 22, {1.3 / 7, 16.4 / 22, 5.7 / 7, 21.4 / 22}, 0.5, &bottle_shape};
  }
  fail(ErrorCode::UnknownObject, "no template for object");
}

inline ObjectTemplate build_template(ObjectId id) {
  constexpr double kTexelsPerCm = 4.0;
  constexpr int kSuper = 3;
  const ObjectSpec spec = object_spec(id);
  const int tw = static_cast<int>(std::lround(spec.width_cm * kTexelsPerCm));
  const int th = static_cast<int>(std::lround(spec.height_cm * kTexelsPerCm));
  ObjectTemplate t{id, spec.width_cm, spec.height_cm, Image(tw, th), Image(tw, th), Image(tw, th),
                   spec.anchor, spec.default_distance_m};
  for (int ty = 0; ty < th; ++ty) {
    for (int tx = 0; tx < tw; ++tx) {
      Rgb b{}, d{};
      double cov = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double x = (tx + (sx + 0.5) / kSuper) / kTexelsPerCm;
          const double y = (ty + (sy + 0.5) / kSuper) / kTexelsPerCm;
          const Texel tex = spec.shape(x, y);
          if (tex.kind == Texel::None) continue;
          cov += 1;
          Rgb& acc = tex.kind == Texel::Body ? b : d;
          for (int c = 0; c < 3; ++c) acc[c] += tex.color[c];
        }
      }
      constexpr double n = kSuper * kSuper;
      for (int c = 0; c < 3; ++c) {
        t.body.at(tx, ty, c) = static_cast<float>(b[c] / n);
        t.detail.at(tx, ty, c) = static_cast<float>(d[c] / n);
        t.coverage.at(tx, ty, c) = static_cast<float>(cov / n);
      }
    }
  }
  return t;
}

}  // namespace detail

/// Shared immutable template for `id` (built once, thread-safe).
inline const ObjectTemplate& object_template(ObjectId id) {
  static std::once_flag once;
  static std::array<std::unique_ptr<ObjectTemplate>, kAllObjects.size()> cache;
  std::call_once(once, [] {
    for (ObjectId o : kAllObjects)
      cache[static_cast<std::size_t>(o)] =
          std::make_unique<ObjectTemplate>(detail::build_template(o));
  });
  const auto idx = static_cast<std::size_t>(id);
  require(idx < cache.size(), ErrorCode::UnknownObject, "no template for object");
  return *cache[idx];
}

/// Scene defaults for one object: catalog width and its reference distance.
inline SceneConfig default_scene(ObjectId id) {
  const ObjectTemplate& t = object_template(id);
  SceneConfig cfg;
  cfg.object = id;
  cfg.object_size_m = t.width_cm / 100.0;
  cfg.distance_m = t.default_distance_m;
  return cfg;
}

/// Background reflectance at normalized canvas position (x, y in [0,1]).
inline Rgb background_albedo(BackgroundId id, double x, double y) {
  switch (id) {
    case BackgroundId::Plain:
      return {0.5, 0.5, 0.5};
    case BackgroundId::Lab: {
      if (y > 0.78) {
        const double grain = 0.03 * std::sin(y * 140.0 + 3.0 * std::sin(x * 9.0));
        return {0.46 + grain, 0.34 + grain, 0.25 + grain};
      }
      const double seam = std::abs(std::fmod(x * 5.0, 1.0) - 0.5) > 0.48 ? -0.08 : 0.0;
      const double g = 0.02 * (1.0 - y);
      return {0.6 + seam + g, 0.59 + seam + g, 0.55 + seam + g};
    }
    case BackgroundId::Outdoor: {
      if (y < 0.45) {
        const double t = y / 0.45;
        return {0.55 + 0.2 * t, 0.7 + 0.15 * t, 0.9 + 0.05 * t};
      }
      const auto xi = static_cast<std::uint64_t>(x * 4096), yi = static_cast<std::uint64_t>(y * 4096);
      const double speckle = (static_cast<double>(mix64(xi * 7919 + yi) & 0xFF) / 255.0 - 0.5) * 0.08;
      return {0.36 + speckle, 0.36 + speckle, 0.38 + speckle};
    }
  }
  return {0.5, 0.5, 0.5};
}

/// Extra per-lens pose for stereo rendering.
struct LensPose {
  double angle_offset_deg = 0.0;
  double baseline_m = 0.0;  ///< lateral displacement of this lens from the reference lens
};

struct StereoRig {
  double baseline_m = 0.12;
  double left_offset_deg = 0.0;
  double right_offset_deg = 2.0;

  void validate() const {
    require(baseline_m >= 0, ErrorCode::InvalidArgument, "baseline_m must be non-negative");
  }
};

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  ///< half-open
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Patch raster resampled into canvas space over the object's anchor.
struct Footprint {
  PixelOrigin origin;
  WarpResult warped;  ///< sized to the footprint bounding box
};

/// Precomputed reflectance and geometry for one scene configuration. All
/// render variants share it, so attack loops pay only for the patch warp.
class SceneRenderer {
 public:
  explicit SceneRenderer(const SceneConfig& cfg, const LensPose& lens = {}) : cfg_(cfg) {
    cfg.validate();
    const ObjectTemplate& tpl = object_template(cfg.object);
    tpl_ = &tpl;
    const int w = cfg.canvas_width, h = cfg.canvas_height;
    const double width_m = cfg.object_size_m;
    const double height_m = width_m * tpl.height_cm / tpl.width_cm;
    const double theta = (cfg.angle_deg + lens.angle_offset_deg) * std::numbers::pi / 180.0;
    const double f = cfg.focal_px;
    const double cx = w / 2.0 - f * lens.baseline_m / cfg.distance_m;
    const double cy = h / 2.0;
    const int tw = tpl.body.width(), th = tpl.body.height();
    // texture px -> object plane (m) -> rotated plane viewed at distance d -> canvas px
    const Homography to_plane({width_m / tw, 0, -width_m / 2, 0, height_m / th, -height_m / 2, 0, 0, 1});
    const Homography view({f * std::cos(theta), 0, 0, 0, f, 0, std::sin(theta), 0, cfg.distance_m});
    to_canvas_ = Homography::translation(cx, cy) * view * to_plane;

    const WarpResult body = warp(tpl.body, to_canvas_, w, h);
    const WarpResult det = warp(tpl.detail, to_canvas_, w, h);
    const WarpResult cov = warp(tpl.coverage, to_canvas_, w, h);

    albedo_ = Image(w, h);
    object_mask_ = Mask(w, h);
    bbox_ = {w, h, 0, 0};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Rgb bg = background_albedo(cfg.background, (x + 0.5) / w, (y + 0.5) / h);
        const double alpha = cov.coverage.at(x, y) ? cov.image.at(x, y, 0) : 0.0;
        for (int c = 0; c < 3; ++c) {
          const double v = static_cast<double>(det.image.at(x, y, c)) +
                           static_cast<double>(body.image.at(x, y, c)) * cfg.surface_albedo[c] +
                           (1.0 - alpha) * bg[c];
          albedo_.at(x, y, c) = static_cast<float>(clamp01(v));
        }
        if (alpha >= 0.5) {
          object_mask_.at(x, y) = 1;
          bbox_.x0 = std::min(bbox_.x0, x);
          bbox_.y0 = std::min(bbox_.y0, y);
          bbox_.x1 = std::max(bbox_.x1, x + 1);
          bbox_.y1 = std::max(bbox_.y1, y + 1);
        }
      }
    }
    if (bbox_.empty()) bbox_ = {};
    ambient_ = static_cast<float>(cfg.ambient_gain());
    projector_ = static_cast<float>(cfg.projector_gain());
    clean_ = Image(w, h);
    const auto a = albedo_.data();
    auto out = clean_.data();
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = clamp01(ambient_ * a[i]);
  }

  const SceneConfig& config() const noexcept { return cfg_; }
  const ObjectTemplate& object() const noexcept { return *tpl_; }
  const Image& albedo() const noexcept { return albedo_; }
  const Image& clean() const noexcept { return clean_; }
  const Mask& object_mask() const noexcept { return object_mask_; }
  PixelRect object_bbox() const noexcept { return bbox_; }
  const Homography& object_to_canvas() const noexcept { return to_canvas_; }
  float ambient_gain() const noexcept { return ambient_; }
  float projector_gain() const noexcept { return projector_; }

  Footprint footprint(const Patch& patch) const {
    require(patch.extent > 0.0 && patch.extent <= 1.0, ErrorCode::PatchTooLarge,
            "patch extent must lie in (0, 1] of the anchor");
    require(!patch.raster.empty() && patch.raster.width() == patch.raster.height(),
            ErrorCode::InvalidArgument, "patch raster must be square");
    const UnitRect& a = tpl_->patch_anchor;
    const double tw = tpl_->body.width(), th = tpl_->body.height();
    const double cu = (a.u0 + a.u1) / 2, cv = (a.v0 + a.v1) / 2;
    const double hu = (a.u1 - a.u0) / 2 * patch.extent, hv = (a.v1 - a.v0) / 2 * patch.extent;
    const double s = patch.side();
    const Homography anchor({(2 * hu * tw) / s, 0, (cu - hu) * tw, 0, (2 * hv * th) / s,
                             (cv - hv) * th, 0, 0, 1});
    const Homography patch_to_canvas = to_canvas_ * anchor;
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    for (auto [px, py] : {std::pair{0.0, 0.0}, {s, 0.0}, {0.0, s}, {s, s}}) {
      double ox = 0, oy = 0;
      patch_to_canvas.apply(px, py, ox, oy);
      xmin = std::min(xmin, ox), ymin = std::min(ymin, oy);
      xmax = std::max(xmax, ox), ymax = std::max(ymax, oy);
    }
    const int x0 = std::clamp(static_cast<int>(std::floor(xmin)), 0, cfg_.canvas_width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(ymin)), 0, cfg_.canvas_height - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(xmax)), x0 + 1, cfg_.canvas_width);
    const int y1 = std::clamp(static_cast<int>(std::ceil(ymax)), y0 + 1, cfg_.canvas_height);
    return {{x0, y0},
            warp(patch.raster, Homography::translation(-x0, -y0) * patch_to_canvas, x1 - x0, y1 - y0)};
  }

  /// Clean scene with the raw patch pasted over its footprint (digital application).
  Image digital(const Patch& patch) const {
    const Footprint fp = footprint(patch);
    return compose(clean_, fp.warped.image, fp.warped.coverage, fp.origin);
  }

  /// Printed sticker: reflectance inside the footprint is replaced by the
  /// sticker colors, then the whole scene is lit by ambient light.
  Image sticker(const Patch& printed) const {
    const Footprint fp = footprint(printed);
    Image out = clean_;
    for_each_covered(fp, [&](int x, int y, int c, float p) {
      out.at(x, y, c) = clamp01(ambient_ * p);
    });
    return out;
  }

  /// Projected patch: inside the footprint the surface reflects ambient plus
  /// projector light, albedo * (ambient + gain * patch), clamped.
  Image projection(const Patch& patch) const {
    const Footprint fp = footprint(patch);
    Image out = clean_;
    for_each_covered(fp, [&](int x, int y, int c, float p) {
      out.at(x, y, c) = clamp01(albedo_.at(x, y, c) * (ambient_ + projector_ * p));
    });
    return out;
  }

 private:
  template <class Fn>
  static void for_each_covered(const Footprint& fp, Fn&& fn) {
    const Image& img = fp.warped.image;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        if (fp.warped.coverage.at(x, y))
          for (int c = 0; c < 3; ++c) fn(fp.origin.x + x, fp.origin.y + y, c, img.at(x, y, c));
  }

  SceneConfig cfg_;
  const ObjectTemplate* tpl_ = nullptr;
  Homography to_canvas_;
  Image albedo_;
  Image clean_;
  Mask object_mask_;
  PixelRect bbox_;
  float ambient_ = 1.0f;
  float projector_ = 0.0f;
};

inline Image render_clean(const SceneConfig& cfg) { return SceneRenderer(cfg).clean(); }

inline Image render_sticker(const SceneConfig& cfg, const Patch& printed) {
  return SceneRenderer(cfg).sticker(printed);
}

inline Image render_projection(const SceneConfig& cfg, const Patch& patch) {
  return SceneRenderer(cfg).projection(patch);
}

inline Image render_digital(const SceneConfig& cfg, const Patch& patch) {
  return SceneRenderer(cfg).digital(patch);
}

enum class Application { Clean, Digital, Sticker, Projection };

inline std::pair<SceneRenderer, SceneRenderer> stereo_renderers(const SceneConfig& cfg,
                                                               const StereoRig& rig) {
  rig.validate();
  return {SceneRenderer(cfg, {rig.left_offset_deg, 0.0}),
          SceneRenderer(cfg, {rig.right_offset_deg, rig.baseline_m})};
}

inline Image render_with(const SceneRenderer& r, Application app, const Patch* patch) {
  switch (app) {
    case Application::Clean: return r.clean();
    case Application::Digital: return r.digital(*patch);
    case Application::Sticker: return r.sticker(*patch);
    case Application::Projection: return r.projection(*patch);
  }
  return r.clean();
}

/// Left lens sits at the monocular pose (plus its angle offset); the right
/// lens is displaced by the rig baseline and its own angle offset.
inline std::pair<Image, Image> render_stereo(const SceneConfig& cfg, const StereoRig& rig,
                                             Application app, const Patch* patch = nullptr) {
  require(app == Application::Clean || patch != nullptr, ErrorCode::InvalidArgument,
          "patch required for this application");
  const auto [left, right] = stereo_renderers(cfg, rig);
  return {render_with(left, app, patch), render_with(right, app, patch)};
}

}  // namespace projlab
