#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "projlab/channel.hpp"
#include "projlab/image.hpp"
#include "projlab/rng.hpp"
#include "projlab/scene.hpp"

namespace projlab {

struct BBox {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  ObjectId label{};
  BBox bbox;
  double confidence = 0.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

inline double logistic(double z) noexcept {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// Highest confidence among detections of `label`; 0 when there are none.
inline double best_confidence(const std::vector<Detection>& dets, ObjectId label) {
  double best = 0.0;
  for (const Detection& d : dets)
    if (d.label == label) best = std::max(best, d.confidence);
  return best;
}

/// Stereo fusion: the larger of the two lenses' best confidences.
inline double stereo_confidence(const std::vector<Detection>& left,
                                const std::vector<Detection>& right, ObjectId label) {
  return std::max(best_confidence(left, label), best_confidence(right, label));
}

// ---------------------------------------------------------------------------
// Template (normalized cross-correlation) detector

/// Zero-mean grayscale template at one pyramid level.
struct ScaledTemplate {
  int width = 0, height = 0;
  std::vector<double> values;  ///< zero mean
  double norm = 0.0;           ///< L2 norm of `values`
};

struct ClassTemplates {
  ObjectId label{};
  std::vector<ScaledTemplate> scales;
};

struct TemplateDetectorModel {
  std::vector<ClassTemplates> classes;
  double slope = 12.0;   ///< a in logistic(a * ncc + b); must be > 0
  double offset = -9.0;  ///< b
  int blur_passes = 2;   ///< binomial smoothing applied to image and templates

  void validate() const {
    require(!classes.empty(), ErrorCode::InvalidArgument, "template model has no classes");
    require(slope > 0.0, ErrorCode::InvalidArgument, "template slope must be positive");
  }
};

inline ScaledTemplate make_scaled_template(std::vector<double> gray, int w, int h) {
  ScaledTemplate t{w, h, std::move(gray), 0.0};
  double mean = 0.0;
  for (double v : t.values) mean += v;
  mean /= static_cast<double>(t.values.size());
  double sq = 0.0;
  for (double& v : t.values) {
    v -= mean;
    sq += v * v;
  }
  t.norm = std::sqrt(sq);
  return t;
}

struct TemplatePyramidOptions {
  int levels = 5;  ///< octave-spaced: 1, 1/2, 1/4, ...
  int min_side = 6;
  int min_area = 100;
  int margin_px = 1;
  BackgroundId background = BackgroundId::Lab;
  int blur_passes = 2;
  std::vector<double> body_tints{1.0};  ///< one pyramid per surface tint
};

/// Builds a pyramid from a reference raster; levels whose shorter side drops
/// below min_side are skipped.
inline ClassTemplates build_class_templates(ObjectId label, const Image& reference,
                                            const TemplatePyramidOptions& opt = {}) {
  ClassTemplates ct{label, {}};
  const std::vector<double> gray = to_gray(reference);
  const int w = reference.width(), h = reference.height();
  for (int k = 0; k < opt.levels; ++k) {
    const double s = std::ldexp(1.0, -k);
    const int sw = static_cast<int>(std::lround(w * s)), sh = static_cast<int>(std::lround(h * s));
    if (std::min(sw, sh) < opt.min_side || sw * sh < opt.min_area) continue;
    std::vector<double> level = k == 0 ? gray : resize_area(gray, w, h, sw, sh);
    ct.scales.push_back(make_scaled_template(blur_binomial(std::move(level), sw, sh, opt.blur_passes), sw, sh));
  }
  return ct;
}

/// Reference view for `label`: clean render at the catalog distance under
/// full ambient light with a gray body of the given tint, cropped to the
/// object box.
inline Image reference_view(ObjectId label, const TemplatePyramidOptions& opt = {}, double tint = 1.0) {
  SceneConfig cfg = default_scene(label);
  cfg.background = opt.background;
  cfg.ambient_lux = cfg.ambient_ref_lux;
  cfg.surface_albedo = {tint, tint, tint};
  const SceneRenderer r(cfg);
  const PixelRect b = r.object_bbox();
  const int x0 = std::max(0, b.x0 - opt.margin_px), y0 = std::max(0, b.y0 - opt.margin_px);
  const int x1 = std::min(cfg.canvas_width, b.x1 + opt.margin_px);
  const int y1 = std::min(cfg.canvas_height, b.y1 + opt.margin_px);
  return crop(r.clean(), x0, y0, x1 - x0, y1 - y0);
}

inline TemplateDetectorModel make_template_model(const std::vector<ObjectId>& labels = {kAllObjects.begin(), kAllObjects.end()},
                                                 const TemplatePyramidOptions& opt = {}) {
  TemplateDetectorModel m;
  m.blur_passes = opt.blur_passes;
  require(!opt.body_tints.empty(), ErrorCode::InvalidArgument, "body_tints must not be empty");
  for (ObjectId id : labels) {
    ClassTemplates ct{id, {}};
    for (double tint : opt.body_tints) {
      ClassTemplates v = build_class_templates(id, reference_view(id, opt, tint), opt);
      ct.scales.insert(ct.scales.end(), v.scales.begin(), v.scales.end());
    }
    m.classes.push_back(std::move(ct));
  }
  return m;
}

namespace detail {

/// Summed-area tables of a grayscale plane and its square.
struct IntegralImages {
  int w = 0, h = 0;
  std::vector<double> sum, sq;  ///< (w+1) x (h+1)

  IntegralImages(const std::vector<double>& g, int width, int height)
      : w(width), h(height), sum((width + 1) * static_cast<std::size_t>(height + 1), 0.0),
        sq(sum.size(), 0.0) {
    for (int y = 0; y < h; ++y) {
      double rs = 0, rq = 0;
      for (int x = 0; x < w; ++x) {
        const double v = g[static_cast<std::size_t>(y) * w + x];
        rs += v;
        rq += v * v;
        sum[idx(x + 1, y + 1)] = sum[idx(x + 1, y)] + rs;
        sq[idx(x + 1, y + 1)] = sq[idx(x + 1, y)] + rq;
      }
    }
  }
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * (w + 1) + x; }
  double box(const std::vector<double>& t, int x, int y, int bw, int bh) const {
    return t[idx(x + bw, y + bh)] - t[idx(x, y + bh)] - t[idx(x + bw, y)] + t[idx(x, y)];
  }
};

struct Match {
  double ncc = -2.0;
  BBox box;
};

/// Best NCC over all positions of every pyramid level that fits.
inline Match best_match(const std::vector<double>& gray, const IntegralImages& ii,
                        const ClassTemplates& ct) {
  Match best;
  const int W = ii.w, H = ii.h;
  for (const ScaledTemplate& t : ct.scales) {
    if (t.width > W || t.height > H) continue;
    const double n = static_cast<double>(t.width) * t.height;
    for (int y = 0; y + t.height <= H; ++y) {
      for (int x = 0; x + t.width <= W; ++x) {
        const double s1 = ii.box(ii.sum, x, y, t.width, t.height);
        const double s2 = ii.box(ii.sq, x, y, t.width, t.height);
        const double var = s2 - s1 * s1 / n;
        double ncc = 0.0;
        if (var > 1e-12 * n && t.norm > 0.0) {
          double num = 0.0;
          const double* tv = t.values.data();
          for (int ty = 0; ty < t.height; ++ty) {
            const double* row = gray.data() + static_cast<std::size_t>(y + ty) * W + x;
            for (int tx = 0; tx < t.width; ++tx) num += tv[tx] * row[tx];
            tv += t.width;
          }
          ncc = std::clamp(num / (t.norm * std::sqrt(var)), -1.0, 1.0);
        }
        if (ncc > best.ncc) best = {ncc, {x, y, t.width, t.height}};
      }
    }
  }
  return best;
}

inline bool any_fits(const ClassTemplates& ct, int w, int h) {
  return std::any_of(ct.scales.begin(), ct.scales.end(),
                     [&](const ScaledTemplate& t) { return t.width <= w && t.height <= h; });
}

}  // namespace detail

/// One detection per class: the best-scoring window across the pyramid, with
/// confidence logistic(a * ncc + b). Zero-variance windows score ncc = 0.
inline std::vector<Detection> detect_template(const Image& img, const TemplateDetectorModel& model) {
  model.validate();
  const std::vector<double> gray = blur_binomial(to_gray(img), img.width(), img.height(), model.blur_passes);
  const detail::IntegralImages ii(gray, img.width(), img.height());
  std::vector<Detection> out;
  for (const ClassTemplates& ct : model.classes) {
    if (!detail::any_fits(ct, img.width(), img.height())) continue;
    const detail::Match m = detail::best_match(gray, ii, ct);
    out.push_back({ct.label, m.box, logistic(model.slope * m.ncc + model.offset)});
  }
  require(!out.empty(), ErrorCode::ImageSmallerThanTemplate, "image is smaller than every template");
  return out;
}

/// detect_template restricted to one class.
inline std::vector<Detection> detect_template(const Image& img, const TemplateDetectorModel& model,
                                              ObjectId label) {
  model.validate();
  const std::vector<double> gray = blur_binomial(to_gray(img), img.width(), img.height(), model.blur_passes);
  const detail::IntegralImages ii(gray, img.width(), img.height());
  std::vector<Detection> out;
  bool fits = false;
  for (const ClassTemplates& ct : model.classes) {
    if (!detail::any_fits(ct, img.width(), img.height())) continue;
    fits = true;
    if (ct.label != label) continue;
    const detail::Match m = detail::best_match(gray, ii, ct);
    out.push_back({ct.label, m.box, logistic(model.slope * m.ncc + model.offset)});
  }
  require(fits, ErrorCode::ImageSmallerThanTemplate, "image is smaller than every template");
  return out;
}

// ---------------------------------------------------------------------------
// Linear (logistic regression) detector

struct LinearDetectorModel {
  static constexpr int kGrid = 16;

  ObjectId label{};
  std::vector<double> weights = std::vector<double>(kGrid * kGrid, 0.0);
  double bias = 0.0;
  bool trained = false;
  std::vector<double> loss_history;

  void validate() const {
    require(weights.size() == static_cast<std::size_t>(kGrid * kGrid), ErrorCode::InvalidArgument,
            "linear model weight length must equal the grid size");
  }
};

inline std::vector<double> linear_features(const Image& img) {
  return resize_area(to_gray(img), img.width(), img.height(), LinearDetectorModel::kGrid,
                     LinearDetectorModel::kGrid);
}

inline double linear_score(const LinearDetectorModel& m, const std::vector<double>& f) {
  double z = m.bias;
  for (std::size_t i = 0; i < f.size(); ++i) z += m.weights[i] * f[i];
  return logistic(z);
}

struct LabeledImage {
  Image image;
  bool positive = false;
};

namespace detail {

inline double mean_bce(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       const std::vector<double>& w, double b) {
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * X[i][j];
    // log(1 + e^z) - y z, computed stably
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += softplus - y[i] * z;
  }
  return loss / static_cast<double>(X.size());
}

}  // namespace detail

/// Full-batch gradient descent on mean binary cross-entropy over 16x16
/// grayscale features. A step that would raise the loss is retried with half
/// the learning rate, so the recorded history never increases.
inline LinearDetectorModel train_linear_detector(const std::vector<LabeledImage>& data, ObjectId label,
                                                 int epochs = 300, double lr = 0.5) {
  const auto positives = std::count_if(data.begin(), data.end(), [](const LabeledImage& d) { return d.positive; });
  require(positives > 0 && positives < static_cast<std::ptrdiff_t>(data.size()), ErrorCode::DegenerateDataset,
          "dataset needs both positive and negative examples");
  require(epochs >= 1 && lr > 0, ErrorCode::InvalidArgument, "epochs and lr must be positive");
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (const LabeledImage& d : data) {
    X.push_back(linear_features(d.image));
    y.push_back(d.positive ? 1.0 : 0.0);
  }
  const std::size_t dim = X.front().size();
  // Center features for conditioning; the shift is folded back into the bias.
  std::vector<double> mu(dim, 0.0);
  for (const auto& x : X)
    for (std::size_t j = 0; j < dim; ++j) mu[j] += x[j] / static_cast<double>(X.size());
  for (auto& x : X)
    for (std::size_t j = 0; j < dim; ++j) x[j] -= mu[j];

  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  double loss = detail::mean_bce(X, y, w, b);
  LinearDetectorModel model;
  model.label = label;
  model.loss_history.push_back(loss);
  double step = lr;
  const double n = static_cast<double>(X.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<double> gw(dim, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      double z = b;
      for (std::size_t j = 0; j < dim; ++j) z += w[j] * X[i][j];
      const double r = logistic(z) - y[i];
      for (std::size_t j = 0; j < dim; ++j) gw[j] += r * X[i][j] / n;
      gb += r / n;
    }
    for (int attempt = 0; attempt < 30; ++attempt) {
      std::vector<double> w2 = w;
      for (std::size_t j = 0; j < dim; ++j) w2[j] -= step * gw[j];
      const double b2 = b - step * gb;
      const double l2 = detail::mean_bce(X, y, w2, b2);
      if (l2 <= loss) {
        w = std::move(w2);
        b = b2;
        loss = l2;
        break;
      }
      step *= 0.5;
    }
    model.loss_history.push_back(loss);
  }
  double shift = 0.0;
  for (std::size_t j = 0; j < dim; ++j) shift += w[j] * mu[j];
  model.weights = std::move(w);
  model.bias = b - shift;
  model.trained = true;
  return model;
}

inline double linear_accuracy(const LinearDetectorModel& m, const std::vector<LabeledImage>& data) {
  std::size_t ok = 0;
  for (const LabeledImage& d : data)
    if ((linear_score(m, linear_features(d.image)) >= 0.5) == d.positive) ++ok;
  return data.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(data.size());
}

/// Background-only frame for a scene configuration.
inline Image render_background(const SceneConfig& cfg) {
  Image img(cfg.canvas_width, cfg.canvas_height);
  const float a = static_cast<float>(cfg.ambient_gain());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const Rgb bg = background_albedo(cfg.background, (x + 0.5) / img.width(), (y + 0.5) / img.height());
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = clamp01(a * static_cast<float>(bg[c]));
    }
  return img;
}

/// Rendered clean-vs-background dataset for `label`: half the frames show
/// the object under randomized pose and lighting, half show background only
/// or another object.
inline std::vector<LabeledImage> linear_training_set(ObjectId label, int count, RngStream& rng,
                                                     const ChannelParams& channel = {}) {
  std::vector<LabeledImage> out;
  for (int i = 0; i < count; ++i) {
    const bool positive = (i % 2) == 0;
    ObjectId obj = label;
    if (!positive) obj = kAllObjects[rng.below(kAllObjects.size())];
    SceneConfig cfg = default_scene(obj);
    cfg.distance_m = cfg.distance_m * rng.uniform(1.0, 2.0);
    cfg.angle_deg = rng.uniform(-20.0, 20.0);
    cfg.ambient_lux = rng.uniform(100.0, 400.0);
    cfg.background = rng.uniform() < 0.5 ? BackgroundId::Lab : BackgroundId::Outdoor;
    Image img = (!positive && (obj == label || rng.uniform() < 0.5)) ? render_background(cfg)
                                                                     : SceneRenderer(cfg).clean();
    out.push_back({capture(img, channel, rng), positive});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pluggable detector interface

class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string name() const = 0;
  /// Detections at or above the reporting threshold.
  virtual std::vector<Detection> detect(const Image& img) const = 0;
  /// Best confidence for one class (0 when not detected).
  virtual double confidence(const Image& img, ObjectId label) const {
    return best_confidence(detect(img), label);
  }
};

inline std::vector<Detection> drop_below(std::vector<Detection> dets, double threshold) {
  std::erase_if(dets, [&](const Detection& d) { return d.confidence < threshold; });
  return dets;
}

class TemplateDetector final : public Detector {
 public:
  explicit TemplateDetector(TemplateDetectorModel model, double report_threshold = 0.25)
      : model_(std::move(model)), threshold_(report_threshold) {
    model_.validate();
  }
  std::string name() const override { return "template"; }
  std::vector<Detection> detect(const Image& img) const override {
    return drop_below(detect_template(img, model_), threshold_);
  }
  double confidence(const Image& img, ObjectId label) const override {
    return best_confidence(drop_below(detect_template(img, model_, label), threshold_), label);
  }
  const TemplateDetectorModel& model() const noexcept { return model_; }
  double threshold() const noexcept { return threshold_; }

 private:
  TemplateDetectorModel model_;
  double threshold_;
};

class LinearDetector final : public Detector {
 public:
  explicit LinearDetector(std::vector<LinearDetectorModel> models, double report_threshold = 0.25)
      : models_(std::move(models)), threshold_(report_threshold) {
    for (const auto& m : models_) {
      m.validate();
      require(m.trained, ErrorCode::UntrainedModel, "linear detector model is untrained");
    }
  }
  std::string name() const override { return "linear"; }
  std::vector<Detection> detect(const Image& img) const override {
    const std::vector<double> f = linear_features(img);
    std::vector<Detection> out;
    for (const auto& m : models_)
      out.push_back({m.label, {0, 0, img.width(), img.height()}, linear_score(m, f)});
    return drop_below(std::move(out), threshold_);
  }
  double confidence(const Image& img, ObjectId label) const override {
    for (const auto& m : models_) {
      if (m.label != label) continue;
      const double s = linear_score(m, linear_features(img));
      return s >= threshold_ ? s : 0.0;
    }
    return 0.0;
  }
  const std::vector<LinearDetectorModel>& models() const noexcept { return models_; }
  double threshold() const noexcept { return threshold_; }

 private:
  std::vector<LinearDetectorModel> models_;
  double threshold_;
};

/// Trains one linear model per label on `per_class` rendered frames each.
inline LinearDetector make_linear_detector(const std::vector<ObjectId>& labels, std::uint64_t seed,
                                           int per_class = 200, int epochs = 300, double lr = 0.5,
                                           double report_threshold = 0.25) {
  std::vector<LinearDetectorModel> models;
  for (ObjectId id : labels) {
    RngStream rng(seed, stream_id({0x11AE, static_cast<std::uint64_t>(id)}));
    models.push_back(train_linear_detector(linear_training_set(id, per_class, rng), id, epochs, lr));
  }
  return LinearDetector(std::move(models), report_threshold);
}

}  // namespace projlab
