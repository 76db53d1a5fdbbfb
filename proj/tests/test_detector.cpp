#include <gtest/gtest.h>

#include "projlab/detector_io.hpp"

using namespace projlab;

namespace {

const TemplateDetectorModel& model() {
  static const TemplateDetectorModel m = make_template_model();
  return m;
}

Image scaled(const Image& img, float k) {
  Image out = img;
  for (float& v : out.data()) v *= k;
  return out;
}

}  // namespace

TEST(BestConfidence, Conventions) {
  EXPECT_EQ(best_confidence({}, ObjectId::Car), 0.0);
  EXPECT_EQ(best_confidence({{ObjectId::Car, {}, 0.2}, {ObjectId::Car, {}, 0.9}}, ObjectId::Car), 0.9);
  EXPECT_EQ(best_confidence({{ObjectId::Cup, {}, 0.8}}, ObjectId::Car), 0.0);
}

TEST(StereoConfidence, TakesTheMax) {
  EXPECT_EQ(stereo_confidence({{ObjectId::Car, {}, 0.3}}, {{ObjectId::Car, {}, 0.7}}, ObjectId::Car), 0.7);
  EXPECT_EQ(stereo_confidence({{ObjectId::Car, {}, 0.59}}, {{ObjectId::Car, {}, 0.41}}, ObjectId::Car), 0.59);
  EXPECT_EQ(stereo_confidence({}, {}, ObjectId::Car), 0.0);
}

TEST(TemplateDetector, ReferenceViewScoresMaximum) {
  const Image ref = reference_view(ObjectId::StopSign);
  const double top = logistic(model().slope + model().offset);
  for (float k : {1.0f, 0.5f, 0.8f}) {
    const auto d = detect_template(scaled(ref, k), model(), ObjectId::StopSign);
    EXPECT_NEAR(best_confidence(d, ObjectId::StopSign), top, 1e-9) << "scale " << k;
  }
}

TEST(TemplateDetector, ConstantImageScoresFloor) {
  const Image flat(96, 72, 0.4f);
  for (const Detection& d : detect_template(flat, model()))
    EXPECT_NEAR(d.confidence, logistic(model().offset), 1e-12);
}

TEST(TemplateDetector, CleanObjectsDetected) {
  const TemplateDetector det(model());
  for (ObjectId o : kAllObjects) {
    SceneConfig cfg = default_scene(o);
    cfg.ambient_lux = 100;
    EXPECT_GE(det.confidence(render_clean(cfg), o), 0.9) << to_string(o);
  }
}

TEST(TemplateDetector, FixedDetailSurvivesBlackBody) {
  const TemplateDetector det(model());
  for (double g : {0.5, 0.1, 0.0}) {
    SceneConfig cfg = default_scene(ObjectId::StopSign);
    cfg.surface_albedo = {g, g, g};
    EXPECT_GE(det.confidence(render_clean(cfg), ObjectId::StopSign), 0.9) << g;
  }
}

TEST(TemplateDetector, ExtraTintFindsDarkBodies) {
  TemplatePyramidOptions opt;
  opt.body_tints = {1.0, 0.3};
  const TemplateDetector det(make_template_model({kAllObjects.begin(), kAllObjects.end()}, opt));
  for (double g : {0.5, 0.1, 0.0}) {
    SceneConfig cfg = default_scene(ObjectId::Car);
    cfg.surface_albedo = {g, g, g};
    EXPECT_GE(det.confidence(render_clean(cfg), ObjectId::Car), 0.5) << g;
  }
  opt.body_tints.clear();
  EXPECT_THROW(make_template_model({ObjectId::Car}, opt), Error);
}

TEST(TemplateDetector, ConfidenceMatchesDetectForLabel) {
  const TemplateDetector det(model());
  const Image img = render_clean(default_scene(ObjectId::Cup));
  EXPECT_DOUBLE_EQ(det.confidence(img, ObjectId::Cup), best_confidence(det.detect(img), ObjectId::Cup));
}

TEST(TemplateDetector, TooSmallImageThrows) {
  EXPECT_THROW(detect_template(Image(3, 3), model()), Error);
}

TEST(TemplateDetector, ReportThresholdZeroesWeakScores) {
  const TemplateDetector det(model(), 0.99);
  EXPECT_EQ(det.confidence(render_clean(default_scene(ObjectId::Car)), ObjectId::Car), 0.0);
}

TEST(TemplateModel, ContainerRoundTripPreservesDetections) {
  const TemplateDetectorModel back =
      template_model_from_container(decode_container(encode_container(template_model_to_container(model()))));
  const Image img = render_clean(default_scene(ObjectId::PottedPlant));
  EXPECT_EQ(detect_template(img, back), detect_template(img, model()));
}

TEST(LinearDetector, SeparableTwoPoints) {
  std::vector<LabeledImage> data{{Image(16, 16, 0.9f), true}, {Image(16, 16, 0.1f), false}};
  const LinearDetectorModel m = train_linear_detector(data, ObjectId::Car, 200, 0.5);
  EXPECT_DOUBLE_EQ(linear_accuracy(m, data), 1.0);
}

TEST(LinearDetector, SingleLabelDatasetIsDegenerate) {
  std::vector<LabeledImage> data{{Image(16, 16, 0.9f), true}, {Image(16, 16, 0.1f), true}};
  EXPECT_THROW(train_linear_detector(data, ObjectId::Car, 10, 0.5), Error);
}

TEST(LinearDetector, RenderedObjectsVersusBackground) {
  RngStream train_rng(1, 1), test_rng(2, 2);
  const auto train = linear_training_set(ObjectId::Car, 200, train_rng);
  const auto test = linear_training_set(ObjectId::Car, 100, test_rng);
  const LinearDetectorModel m = train_linear_detector(train, ObjectId::Car, 300, 0.5);
  EXPECT_GE(linear_accuracy(m, test), 0.95);
}

TEST(LinearDetector, ContainerRoundTrip) {
  const LinearDetector det = make_linear_detector({ObjectId::Car, ObjectId::Cup}, 3, 40, 50);
  const auto back = linear_models_from_container(decode_container(encode_container(linear_models_to_container(det.models()))));
  const LinearDetector det2(back);
  const Image img = render_clean(default_scene(ObjectId::Car));
  EXPECT_EQ(det.detect(img), det2.detect(img));
}

TEST(DetectorContainer, WrongKindRejected) {
  Container c;
  c.kind = "something_else";
  EXPECT_THROW(template_model_from_container(c), Error);
  EXPECT_THROW(linear_models_from_container(c), Error);
}
