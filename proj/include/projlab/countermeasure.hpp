#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "projlab/attack.hpp"
#include "projlab/container.hpp"
#include "projlab/geometry.hpp"
#include "projlab/image.hpp"
#include "projlab/scene.hpp"

namespace projlab {

enum class FrameLabel { Unpatched = 0, Patched = 1 };

inline std::string_view to_string(FrameLabel l) { return l == FrameLabel::Patched ? "patched" : "unpatched"; }

struct LabeledFrame {
  Image image;
  FrameLabel label = FrameLabel::Unpatched;
  SceneConfig provenance;
};

/// Sampling ranges for generated frames. Lumens are drawn uniformly between
/// the bounds; everything else likewise unless stated.
struct VariationRanges {
  std::vector<ObjectId> objects{kAllObjects.begin(), kAllObjects.end()};
  std::vector<BackgroundId> backgrounds{BackgroundId::Lab, BackgroundId::Outdoor};
  double distance_lo = 0.5, distance_hi = 1.5;  ///< multiples of each object's catalog distance
  double angle_lo = -20, angle_hi = 20;
  double lux_lo = 100, lux_hi = 400;
  double lumens_lo = 1800, lumens_hi = 6000;
  double albedo_lo = 0.6, albedo_hi = 1.0;
  int patch_side = 8;
};

inline SceneConfig sample_scene(const VariationRanges& v, RngStream& rng) {
  SceneConfig s = default_scene(v.objects[rng.below(v.objects.size())]);
  s.background = v.backgrounds[rng.below(v.backgrounds.size())];
  s.distance_m = s.distance_m * rng.uniform(v.distance_lo, v.distance_hi);
  s.angle_deg = rng.uniform(v.angle_lo, v.angle_hi);
  s.ambient_lux = rng.uniform(v.lux_lo, v.lux_hi);
  s.projector_lumens = rng.uniform(v.lumens_lo, v.lumens_hi);
  const double alb = rng.uniform(v.albedo_lo, v.albedo_hi);
  s.surface_albedo = {alb, alb, alb};
  return s;
}

/// Patched frames first, then unpatched; each frame draws from its own stream.
inline std::vector<LabeledFrame> generate_dataset(int n_patched, int n_unpatched, const VariationRanges& ranges,
                                                  std::uint64_t seed, const ChannelParams& channel = {},
                                                  int jobs = 1) {
  require(n_patched >= 1 && n_unpatched >= 1, ErrorCode::InvalidArgument, "dataset counts must be >= 1");
  const auto total = static_cast<std::size_t>(n_patched + n_unpatched);
  std::vector<LabeledFrame> frames(total);
  parallel_for(total, jobs, [&](std::size_t i) {
    RngStream rng(seed, stream_id({0xDA7A, i}));
    LabeledFrame& f = frames[i];
    f.label = i < static_cast<std::size_t>(n_patched) ? FrameLabel::Patched : FrameLabel::Unpatched;
    f.provenance = sample_scene(ranges, rng);
    const SceneRenderer r(f.provenance);
    Image scene = f.label == FrameLabel::Patched ? r.projection(init_random_patch(ranges.patch_side, rng)) : r.clean();
    f.image = capture(scene, channel, rng);
  });
  return frames;
}

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentParams {
  double rotation_deg = 0.0;
  double shift_x = 0.0, shift_y = 0.0;  ///< fractions of width / height
  double zoom = 1.0;
  bool hflip = false;
};

inline Image apply_augmentation(const Image& img, const AugmentParams& p) {
  const double cx = img.width() / 2.0, cy = img.height() / 2.0;
  const Homography h = Homography::translation(p.shift_x * img.width(), p.shift_y * img.height()) *
                       Homography::rotation(p.rotation_deg, cx, cy) * Homography::translation(cx, cy) *
                       Homography::scale(p.zoom, p.zoom) * Homography::translation(-cx, -cy);
  Image out = warp(img, h, img.width(), img.height(), Border::Replicate).image;
  return p.hflip ? hflip(out) : out;
}

/// One transform chosen uniformly from rotation (<= 15 deg), shift (<= 10%),
/// zoom (0.9..1.1) and horizontal flip.
inline AugmentParams random_augmentation(RngStream& rng) {
  AugmentParams p;
  switch (rng.below(4)) {
    case 0: p.rotation_deg = rng.uniform(-15.0, 15.0); break;
    case 1:
      p.shift_x = rng.uniform(-0.1, 0.1);
      p.shift_y = rng.uniform(-0.1, 0.1);
      break;
    case 2: p.zoom = rng.uniform(0.9, 1.1); break;
    default: p.hflip = true; break;
  }
  return p;
}

inline LabeledFrame augment(const LabeledFrame& f, RngStream& rng) {
  return {apply_augmentation(f.image, random_augmentation(rng)), f.label, f.provenance};
}

// ---------------------------------------------------------------------------
// Features

inline constexpr std::string_view kFeatureSpec = "sv16-lap-rgb-grid8/v1";
inline constexpr std::size_t kHistBins = 16;
inline constexpr int kGridCells = 8;
inline constexpr std::size_t kFeatureDim = 2 * kHistBins + 1 + 6 + kGridCells * kGridCells;

/// Saturation and value histograms (fractions of pixels), mean absolute
/// 4-neighbour Laplacian of luma over interior pixels, per-channel mean and
/// std, and luma variance inside each cell of an 8x8 grid.
inline std::vector<double> extract_features(const Image& img) {
  std::vector<double> f(kFeatureDim, 0.0);
  const int w = img.width(), h = img.height();
  const double n = static_cast<double>(img.pixel_count());
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
      const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
      const double sat = mx > 0 ? (mx - mn) / mx : 0.0;
      const auto bin = [](double v) { return std::min<std::size_t>(kHistBins - 1, static_cast<std::size_t>(v * kHistBins)); };
      f[bin(sat)] += 1.0 / n;
      f[kHistBins + bin(mx)] += 1.0 / n;
      const double ch[3] = {r, g, b};
      for (int c = 0; c < 3; ++c) {
        sum[c] += ch[c];
        sq[c] += ch[c] * ch[c];
      }
    }
  const std::vector<double> gray = to_gray(img);
  const auto G = [&](int x, int y) { return gray[static_cast<std::size_t>(y) * w + x]; };
  double lap = 0.0;
  int interior = 0;
  for (int y = 1; y + 1 < h; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      lap += std::abs(G(x - 1, y) + G(x + 1, y) + G(x, y - 1) + G(x, y + 1) - 4.0 * G(x, y));
      ++interior;
    }
  std::size_t k = 2 * kHistBins;
  f[k++] = interior ? lap / interior : 0.0;
  for (int c = 0; c < 3; ++c) {
    const double m = sum[c] / n;
    f[k++] = m;
    f[k++] = std::sqrt(std::max(0.0, sq[c] / n - m * m));
  }
  for (int gy = 0; gy < kGridCells; ++gy)
    for (int gx = 0; gx < kGridCells; ++gx) {
      const int x0 = gx * w / kGridCells, x1 = std::max(x0 + 1, (gx + 1) * w / kGridCells);
      const int y0 = gy * h / kGridCells, y1 = std::max(y0 + 1, (gy + 1) * h / kGridCells);
      double s = 0, s2 = 0;
      int cnt = 0;
      for (int y = y0; y < std::min(y1, h); ++y)
        for (int x = x0; x < std::min(x1, w); ++x) {
          s += G(x, y);
          s2 += G(x, y) * G(x, y);
          ++cnt;
        }
      const double m = cnt ? s / cnt : 0.0;
      f[k++] = cnt ? std::max(0.0, s2 / cnt - m * m) : 0.0;
    }
  return f;
}

// ---------------------------------------------------------------------------
// Classifier

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_auc = 0.0;
};

struct ClassifierModel {
  std::string feature_spec{kFeatureSpec};
  std::vector<double> feature_mean, feature_scale;  ///< z-scoring applied before the weights
  std::vector<double> weights;
  double bias = 0.0;
  bool trained = false;
  std::vector<EpochStats> history;
  int best_epoch = 0;  ///< 1-based epoch of the returned snapshot
  int epochs_run = 0;
};

struct TrainOptions {
  int epochs_max = 3000;
  double lr = 0.5;
  double l2_weight = 1e-3;
  int patience = 100;
  double min_delta = 1e-7;  ///< smallest validation-loss drop that counts as improvement
  double val_split = 0.2;
};

inline double classifier_score(const ClassifierModel& m, const std::vector<double>& features) {
  require(features.size() == m.weights.size(), ErrorCode::DimensionMismatch, "feature length does not match model");
  double z = m.bias;
  for (std::size_t j = 0; j < features.size(); ++j) z += m.weights[j] * (features[j] - m.feature_mean[j]) / m.feature_scale[j];
  return logistic(z);
}

inline double classifier_score(const ClassifierModel& m, const Image& img) {
  require(m.trained, ErrorCode::UntrainedModel, "classifier is untrained");
  return classifier_score(m, extract_features(img));
}

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0, tpr = 0.0;
};

struct Confusion {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
};

struct EvalReport {
  std::size_t count = 0;
  double accuracy = 0.0;
  double auc = 0.0;
  std::vector<RocPoint> roc;  ///< from (0,0) to (1,1), thresholds descending
  Confusion confusion;        ///< at threshold 0.5
};

/// ROC over every distinct score, AUC by the trapezoid rule, confusion at 0.5.
inline EvalReport evaluate_scores(const std::vector<double>& scores, const std::vector<bool>& positive) {
  require(scores.size() == positive.size(), ErrorCode::DimensionMismatch, "scores and labels differ in length");
  EvalReport rep;
  rep.count = scores.size();
  const auto P = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double N = static_cast<double>(scores.size()) - P;
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  rep.roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == t; ++i) (positive[order[i]] ? tp : fp) += 1.0;
    rep.roc.push_back({t, N > 0 ? fp / N : 0.0, P > 0 ? tp / P : 0.0});
  }
  if (rep.roc.back().fpr != 1.0 || rep.roc.back().tpr != 1.0) rep.roc.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
  for (std::size_t i = 1; i < rep.roc.size(); ++i)
    rep.auc += (rep.roc[i].fpr - rep.roc[i - 1].fpr) * (rep.roc[i].tpr + rep.roc[i - 1].tpr) / 2.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= 0.5;
    if (pred && positive[i]) ++rep.confusion.tp;
    else if (!pred && positive[i]) ++rep.confusion.fn;
    else if (pred) ++rep.confusion.fp;
    else ++rep.confusion.tn;
    if (pred == positive[i]) ++correct;
  }
  rep.accuracy = scores.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(scores.size());
  return rep;
}

namespace detail {

inline double regularized_bce(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                              const std::vector<double>& w, double b, double l2, std::vector<double>* scores = nullptr) {
  double loss = 0.0;
  if (scores) scores->assign(X.size(), 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * X[i][j];
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += softplus - y[i] * z;
    if (scores) (*scores)[i] = logistic(z);
  }
  loss /= static_cast<double>(X.size());
  double norm = 0.0;
  for (double v : w) norm += v * v;
  return loss + l2 * norm;
}

}  // namespace detail

/// Logistic regression by full-batch gradient descent with a seeded,
/// label-stratified validation split, early stopping on validation loss and
/// a best-epoch snapshot. Steps that would raise the training loss are
/// retried at half the learning rate.
inline ClassifierModel train_classifier(const std::vector<std::vector<double>>& features, const std::vector<bool>& labels,
                                        const TrainOptions& opt, RngStream& rng) {
  require(features.size() == labels.size(), ErrorCode::DimensionMismatch, "features and labels differ in length");
  const auto npos = std::count(labels.begin(), labels.end(), true);
  require(npos > 0 && npos < static_cast<std::ptrdiff_t>(labels.size()), ErrorCode::DegenerateDataset,
          "training data needs both labels");
  require(opt.epochs_max >= 1 && opt.lr > 0 && opt.patience >= 0 && opt.val_split >= 0 && opt.val_split < 1,
          ErrorCode::InvalidArgument, "invalid training options");
  const std::size_t dim = features.front().size();

  std::vector<std::size_t> train_idx, val_idx;
  for (bool cls : {true, false}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    shuffle(idx, rng);
    const auto n_val = static_cast<std::size_t>(std::lround(opt.val_split * static_cast<double>(idx.size())));
    val_idx.insert(val_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  if (val_idx.empty()) val_idx = train_idx;

  ClassifierModel m;
  m.feature_mean.assign(dim, 0.0);
  m.feature_scale.assign(dim, 0.0);
  for (std::size_t i : train_idx)
    for (std::size_t j = 0; j < dim; ++j) m.feature_mean[j] += features[i][j] / static_cast<double>(train_idx.size());
  for (std::size_t i : train_idx)
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = features[i][j] - m.feature_mean[j];
      m.feature_scale[j] += d * d / static_cast<double>(train_idx.size());
    }
  for (double& s : m.feature_scale) s = s > 1e-24 ? std::sqrt(s) : 1.0;

  auto standardize = [&](const std::vector<std::size_t>& idx, std::vector<std::vector<double>>& X, std::vector<double>& y) {
    for (std::size_t i : idx) {
      std::vector<double> row(dim);
      for (std::size_t j = 0; j < dim; ++j) row[j] = (features[i][j] - m.feature_mean[j]) / m.feature_scale[j];
      X.push_back(std::move(row));
      y.push_back(labels[i] ? 1.0 : 0.0);
    }
  };
  std::vector<std::vector<double>> Xt, Xv;
  std::vector<double> yt, yv;
  standardize(train_idx, Xt, yt);
  standardize(val_idx, Xv, yv);
  std::vector<bool> val_pos(yv.size());
  for (std::size_t i = 0; i < yv.size(); ++i) val_pos[i] = yv[i] > 0.5;

  std::vector<double> w(dim, 0.0), best_w = w;
  double b = 0.0, best_b = 0.0;
  double train_loss = detail::regularized_bce(Xt, yt, w, b, opt.l2_weight);
  double best_val = std::numeric_limits<double>::infinity();
  double step = opt.lr;
  int since_best = 0;
  const double n = static_cast<double>(Xt.size());
  for (int epoch = 1; epoch <= opt.epochs_max; ++epoch) {
    std::vector<double> gw(dim, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < Xt.size(); ++i) {
      double z = b;
      for (std::size_t j = 0; j < dim; ++j) z += w[j] * Xt[i][j];
      const double r = (logistic(z) - yt[i]) / n;
      for (std::size_t j = 0; j < dim; ++j) gw[j] += r * Xt[i][j];
      gb += r;
    }
    for (std::size_t j = 0; j < dim; ++j) gw[j] += 2.0 * opt.l2_weight * w[j];
    for (int attempt = 0; attempt < 40; ++attempt) {
      std::vector<double> w2(dim);
      for (std::size_t j = 0; j < dim; ++j) w2[j] = w[j] - step * gw[j];
      const double b2 = b - step * gb;
      const double l = detail::regularized_bce(Xt, yt, w2, b2, opt.l2_weight);
      if (l <= train_loss) {
        w = std::move(w2);
        b = b2;
        train_loss = l;
        break;
      }
      step *= 0.5;
    }
    std::vector<double> val_scores;
    EpochStats st;
    st.train_loss = train_loss;
    st.val_loss = detail::regularized_bce(Xv, yv, w, b, 0.0, &val_scores);
    const EvalReport vr = evaluate_scores(val_scores, val_pos);
    st.val_accuracy = vr.accuracy;
    st.val_auc = vr.auc;
    m.history.push_back(st);
    m.epochs_run = epoch;
    if (st.val_loss < best_val - opt.min_delta) {
      best_val = st.val_loss;
      best_w = w;
      best_b = b;
      m.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= opt.patience) break;
  }
  m.weights = std::move(best_w);
  m.bias = best_b;
  m.trained = true;
  return m;
}

inline ClassifierModel train_classifier(const std::vector<LabeledFrame>& frames, const TrainOptions& opt, RngStream& rng) {
  std::vector<std::vector<double>> X;
  std::vector<bool> y;
  for (const LabeledFrame& f : frames) {
    X.push_back(extract_features(f.image));
    y.push_back(f.label == FrameLabel::Patched);
  }
  return train_classifier(X, y, opt, rng);
}

inline EvalReport evaluate(const ClassifierModel& m, const std::vector<LabeledFrame>& frames) {
  std::vector<double> scores;
  std::vector<bool> pos;
  for (const LabeledFrame& f : frames) {
    scores.push_back(classifier_score(m, f.image));
    pos.push_back(f.label == FrameLabel::Patched);
  }
  return evaluate_scores(scores, pos);
}

enum class GateDecision { Pass, Flag };

inline std::string_view to_string(GateDecision d) { return d == GateDecision::Flag ? "flag" : "pass"; }

inline GateDecision gate(const Image& img, const ClassifierModel& m, double threshold) {
  return classifier_score(m, img) >= threshold ? GateDecision::Flag : GateDecision::Pass;
}

// ---------------------------------------------------------------------------
// Serialization

inline Container classifier_to_container(const ClassifierModel& m) {
  require(m.trained, ErrorCode::UntrainedModel, "refusing to save an untrained classifier");
  Container c;
  c.kind = "projection_classifier";
  c.put_text("feature_spec", m.feature_spec);
  c.put("feature_mean", m.feature_mean);
  c.put("feature_scale", m.feature_scale);
  c.put("weights", m.weights);
  c.put_scalar("bias", m.bias);
  c.put_scalar("best_epoch", m.best_epoch);
  c.put_scalar("epochs_run", m.epochs_run);
  std::vector<double> hist;
  for (const EpochStats& e : m.history) hist.insert(hist.end(), {e.train_loss, e.val_loss, e.val_accuracy, e.val_auc});
  c.put("history", hist, {static_cast<std::uint32_t>(m.history.size()), 4});
  return c;
}

inline ClassifierModel classifier_from_container(const Container& c) {
  require(c.kind == "projection_classifier", ErrorCode::MalformedHeader, "container does not hold a classifier");
  ClassifierModel m;
  m.feature_spec = c.text("feature_spec");
  require(m.feature_spec == kFeatureSpec, ErrorCode::MalformedHeader, "unsupported feature spec " + m.feature_spec);
  m.feature_mean = c.array("feature_mean").values;
  m.feature_scale = c.array("feature_scale").values;
  m.weights = c.array("weights").values;
  require(m.weights.size() == kFeatureDim && m.feature_mean.size() == kFeatureDim && m.feature_scale.size() == kFeatureDim,
          ErrorCode::DimensionMismatch, "classifier arrays have the wrong length");
  m.bias = c.scalar("bias");
  m.best_epoch = static_cast<int>(c.scalar("best_epoch"));
  m.epochs_run = static_cast<int>(c.scalar("epochs_run"));
  const ContainerArray& h = c.array("history");
  for (std::size_t i = 0; i + 3 < h.values.size(); i += 4)
    m.history.push_back({h.values[i], h.values[i + 1], h.values[i + 2], h.values[i + 3]});
  m.trained = true;
  return m;
}

}  // namespace projlab
