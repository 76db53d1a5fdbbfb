#include <gtest/gtest.h>

#include <cmath>

#include "projlab/countermeasure.hpp"
#include "oracles.hpp"

using namespace projlab;

namespace {

Image texture(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<float>(0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y + c));
  return img;
}

}  // namespace

TEST(Evaluate, PerfectScorer) {
  const EvalReport r = evaluate_scores({1, 1, 0, 0}, {true, true, false, false});
  EXPECT_DOUBLE_EQ(r.auc, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

TEST(Evaluate, ConstantScorerIsChance) {
  const EvalReport r = evaluate_scores({0.3, 0.3, 0.3, 0.3}, {true, false, true, false});
  EXPECT_DOUBLE_EQ(r.auc, 0.5);
  ASSERT_EQ(r.roc.size(), 2u);
  EXPECT_EQ(r.roc.front().fpr, 0.0);
  EXPECT_EQ(r.roc.front().tpr, 0.0);
  EXPECT_EQ(r.roc.back().fpr, 1.0);
  EXPECT_EQ(r.roc.back().tpr, 1.0);
}

TEST(Evaluate, HandThresholdSweep) {
  const EvalReport r = evaluate_scores({0.9, 0.8, 0.3, 0.1}, {true, true, false, false});
  EXPECT_DOUBLE_EQ(r.auc, 1.0);
  EXPECT_EQ(r.confusion.tp, 2u);
  EXPECT_EQ(r.confusion.fn, 0u);
  EXPECT_EQ(r.confusion.fp, 0u);
  EXPECT_EQ(r.confusion.tn, 2u);
}

TEST(Evaluate, AucEqualsPairStatistic) {
  RngStream rng(10, 1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 4 + rng.below(20);
    std::vector<double> s(n);
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(rng.uniform() * 8) / 8;  // coarse grid forces ties
      pos[i] = i < 2 || (i >= n - 2 ? false : rng.uniform() < 0.5);
    }
    const EvalReport r = evaluate_scores(s, pos);
    ASSERT_NEAR(r.auc, oracle::mann_whitney(s, pos), 1e-9);
    for (std::size_t k = 1; k < r.roc.size(); ++k) {
      ASSERT_GE(r.roc[k].fpr, r.roc[k - 1].fpr);
      ASSERT_GE(r.roc[k].tpr, r.roc[k - 1].tpr);
    }
  }
}

TEST(Augment, IdentityParametersChangeNothing) {
  const Image img = texture(24, 18);
  EXPECT_EQ(apply_augmentation(img, {}), img);
}

TEST(Augment, FlipTwiceRestores) {
  const Image img = texture(24, 18);
  AugmentParams p;
  p.hflip = true;
  EXPECT_EQ(apply_augmentation(apply_augmentation(img, p), p), img);
}

TEST(Augment, RotationRoundTripWithinResamplingError) {
  const Image img = texture(48, 36);
  AugmentParams fwd, back;
  fwd.rotation_deg = 15;
  back.rotation_deg = -15;
  const Image round = apply_augmentation(apply_augmentation(img, fwd), back);
  // Corners leave the frame and come back replicated; compare the inscribed region.
  const Image a = crop(img, 12, 9, 24, 18), b = crop(round, 12, 9, 24, 18);
  EXPECT_LE(norms(a, b).linf, 8);
}

TEST(Augment, LabelPreservedAndRangeKept) {
  RngStream rng(11, 1);
  const auto frames = generate_dataset(2, 2, {}, 5);
  for (int i = 0; i < 200; ++i) {
    const LabeledFrame& f = frames[static_cast<std::size_t>(i) % frames.size()];
    const LabeledFrame g = augment(f, rng);
    ASSERT_EQ(g.label, f.label);
    for (float v : g.image.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
  }
}

TEST(Dataset, CountsAndDeterminism) {
  const auto a = generate_dataset(1, 1, {}, 9);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NE(a[0].label, a[1].label);
  const auto b = generate_dataset(1, 1, {}, 9);
  EXPECT_EQ(a[0].image, b[0].image);
  EXPECT_EQ(a[1].image, b[1].image);
}

TEST(Features, UniformGrayHasNoTexture) {
  const auto f = extract_features(Image(32, 24, 0.5f));
  ASSERT_EQ(f.size(), kFeatureDim);
  // Layout: 16 saturation bins, 16 value bins, Laplacian energy, 6 channel
  // moments, then the 8x8 grid of local variances.
  EXPECT_NEAR(f[32], 0.0, 1e-12);
  for (std::size_t i = 39; i < kFeatureDim; ++i) EXPECT_NEAR(f[i], 0.0, 1e-12);
  EXPECT_EQ(extract_features(Image(32, 24, 0.5f)), f);
}

TEST(Features, ProjectionShiftsSaturationHistogram) {
  const SceneConfig cfg = default_scene(ObjectId::Car);
  const SceneRenderer r(cfg);
  Patch p = Patch::filled(8, 0.0f);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) p.raster.at(x, y, (x + y) % 3) = 1.0f;
  const auto a = extract_features(r.clean()), b = extract_features(r.projection(p));
  double l1 = 0;
  for (std::size_t i = 0; i < kHistBins; ++i) l1 += std::abs(a[i] - b[i]);
  EXPECT_GT(l1, 0.02);
}

TEST(Classifier, SeparableToyStopsEarly) {
  std::vector<std::vector<double>> X;
  std::vector<bool> y;
  RngStream data(12, 1);
  for (int i = 0; i < 60; ++i) {
    const bool pos = i % 2 == 0;
    X.push_back({(pos ? 2.0 : -2.0) + 0.1 * data.normal(), data.normal()});
    y.push_back(pos);
  }
  TrainOptions opt;
  opt.patience = 20;
  RngStream rng(12, 2);
  const ClassifierModel m = train_classifier(X, y, opt, rng);
  int correct = 0;
  for (std::size_t i = 0; i < X.size(); ++i) correct += (classifier_score(m, X[i]) >= 0.5) == y[i];
  EXPECT_EQ(correct, 60);
  EXPECT_LT(m.epochs_run, opt.epochs_max);
  EXPECT_LE(m.best_epoch, m.epochs_run);
  EXPECT_LE(m.history[static_cast<std::size_t>(m.best_epoch - 1)].train_loss, m.history.front().train_loss);
}

TEST(Classifier, PatienceZeroRunsOneEpoch) {
  std::vector<std::vector<double>> X{{1}, {2}, {-1}, {-2}, {1.5}, {-1.5}};
  std::vector<bool> y{true, true, false, false, true, false};
  TrainOptions opt;
  opt.patience = 0;
  opt.val_split = 0.34;
  RngStream rng(1, 1);
  EXPECT_EQ(train_classifier(X, y, opt, rng).epochs_run, 1);
}

TEST(Classifier, SingleLabelIsDegenerate) {
  RngStream rng(1, 1);
  EXPECT_THROW(train_classifier(std::vector<std::vector<double>>{{1}, {2}}, {true, true}, {}, rng), Error);
}

TEST(Gate, ThresholdExtremesAndDeterminism) {
  std::vector<std::vector<double>> X;
  std::vector<bool> y;
  const auto frames = generate_dataset(20, 20, {}, 3);
  RngStream rng(2, 2);
  TrainOptions opt;
  opt.epochs_max = 50;
  const ClassifierModel m = train_classifier(frames, opt, rng);
  const Image& img = frames.front().image;
  EXPECT_EQ(gate(img, m, 0.0), GateDecision::Flag);
  EXPECT_EQ(gate(img, m, 1.01), GateDecision::Pass);
  EXPECT_EQ(gate(img, m, 0.5), gate(img, m, 0.5));
  EXPECT_THROW(gate(img, ClassifierModel{}, 0.5), Error);
}

TEST(Classifier, ContainerRoundTrip) {
  const auto frames = generate_dataset(10, 10, {}, 4);
  RngStream rng(3, 3);
  TrainOptions opt;
  opt.epochs_max = 30;
  const ClassifierModel m = train_classifier(frames, opt, rng);
  const ClassifierModel back = classifier_from_container(decode_container(encode_container(classifier_to_container(m))));
  for (const auto& f : frames) EXPECT_EQ(classifier_score(back, f.image), classifier_score(m, f.image));
}
