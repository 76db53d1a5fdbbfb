#include <gtest/gtest.h>

#include "projlab/channel.hpp"
#include "projlab/metrics.hpp"
#include "projlab/scene.hpp"

using namespace projlab;

namespace {

Image corners() {
  Image img(2, 2);
  const float v[4][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}};  // TL TR BL BR
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 3; ++c) img.at(i % 2, i / 2, c) = v[i][c];
  return img;
}

SceneConfig car() { return default_scene(ObjectId::Car); }

}  // namespace

TEST(Warp, ScaleOfConstantIsConstant) {
  const Image flat(5, 4, 0.37f);
  const WarpResult r = warp(flat, Homography::scale(2, 2), 10, 8);
  for (float v : r.image.data()) EXPECT_FLOAT_EQ(v, 0.37f);
}

TEST(Warp, QuarterTurnPermutesCornersCyclically) {
  const Image src = corners();
  const Image out = warp(src, Homography::rotation(90, 1, 1), 2, 2).image;
  // TL <- BL, TR <- TL, BR <- TR, BL <- BR
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(out.at(0, 0, c), src.at(0, 1, c), 1e-6);
    EXPECT_NEAR(out.at(1, 0, c), src.at(0, 0, c), 1e-6);
    EXPECT_NEAR(out.at(1, 1, c), src.at(1, 0, c), 1e-6);
    EXPECT_NEAR(out.at(0, 1, c), src.at(1, 1, c), 1e-6);
  }
}

TEST(Compose, MaskControlsReplacement) {
  const Image base(2, 2, 0.2f), over(2, 2, 0.9f);
  EXPECT_EQ(compose(base, over, Mask(2, 2), {0, 0}), base);
  Mask full(2, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) full.at(x, y) = 1;
  EXPECT_EQ(compose(base, over, full, {0, 0}), over);
  Mask one(1, 1);
  one.at(0, 0) = 1;
  EXPECT_DOUBLE_EQ(norms(compose(base, Image(1, 1, 0.9f), one, {0, 0}), base).l0_pct, 25.0);
  EXPECT_THROW(compose(base, over, full, {1, 0}), Error);
}

TEST(Render, Deterministic) { EXPECT_EQ(render_clean(car()), render_clean(car())); }

TEST(Render, FootprintAreaFallsWithDistanceSquared) {
  SceneConfig near = car(), far = car();
  near.distance_m = 0.5;
  far.distance_m = 1.0;
  const double a = static_cast<double>(SceneRenderer(near).object_mask().count());
  const double b = static_cast<double>(SceneRenderer(far).object_mask().count());
  EXPECT_NEAR(a / b, 4.0, 0.4);
}

TEST(Render, AmbientScalesLinearlyBeforeClamp) {
  SceneConfig lo = car(), hi = car();
  lo.ambient_lux = 100;
  hi.ambient_lux = 400;
  const SceneRenderer rl(lo), rh(hi);
  const auto& m = rl.object_mask();
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y))
        for (int c = 0; c < 3; ++c) ASSERT_NEAR(rh.clean().at(x, y, c), 4 * rl.clean().at(x, y, c), 1e-5);
}

TEST(Render, BlackStickerDarkensAnchor) {
  const SceneRenderer r(car());
  const Image s = r.sticker(Patch::filled(8, 0.0f));
  const Footprint fp = r.footprint(Patch::filled(8, 0.0f));
  double inside = 0;
  int n = 0;
  for (int y = 0; y < fp.warped.coverage.height(); ++y)
    for (int x = 0; x < fp.warped.coverage.width(); ++x)
      if (fp.warped.coverage.at(x, y)) inside += s.at(fp.origin.x + x, fp.origin.y + y, 0), ++n;
  EXPECT_GT(n, 0);
  EXPECT_EQ(inside, 0.0);
}

TEST(Render, StickerMatchingSurfaceIsNoOp) {
  SceneConfig cfg = car();
  cfg.background = BackgroundId::Plain;
  const SceneRenderer r(cfg);
  // The anchor sits on the body; a sticker the body's own color changes nothing.
  const Footprint fp = r.footprint(Patch::filled(8, 1.0f));
  Patch same = Patch::filled(8, 1.0f);
  const int cx = fp.origin.x + fp.warped.image.width() / 2, cy = fp.origin.y + fp.warped.image.height() / 2;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) same.raster.at(x, y, c) = r.albedo().at(cx, cy, c);
  const Image s = r.sticker(same);
  EXPECT_LE(norms(s, r.clean()).linf, 1);
}

TEST(Render, ZeroAlbedoAnnihilatesProjection) {
  SceneConfig cfg = car();
  cfg.surface_albedo = {0, 0, 0};
  const SceneRenderer r(cfg);
  const Footprint fp = r.footprint(Patch::filled(8, 1.0f));
  const Image p = r.projection(Patch::filled(8, 1.0f));
  // Only pixels whose albedo comes from fixed-color detail may change.
  for (int y = 0; y < fp.warped.coverage.height(); ++y)
    for (int x = 0; x < fp.warped.coverage.width(); ++x) {
      const int cx = fp.origin.x + x, cy = fp.origin.y + y;
      if (r.albedo().at(cx, cy, 0) == 0 && r.albedo().at(cx, cy, 1) == 0 && r.albedo().at(cx, cy, 2) == 0)
        ASSERT_EQ(p.at(cx, cy, 0), r.clean().at(cx, cy, 0));
    }
}

TEST(Render, ProjectionClampsAtOne) {
  SceneConfig cfg = car();
  cfg.ambient_lux = 80;  // gain 0.2
  cfg.projector_lumens = 3200;  // gain 0.8
  const SceneRenderer r(cfg);
  const Footprint fp = r.footprint(Patch::filled(8, 1.0f));
  const Image p = r.projection(Patch::filled(8, 1.0f));
  const int cx = fp.origin.x + fp.warped.image.width() / 2, cy = fp.origin.y + fp.warped.image.height() / 2;
  EXPECT_FLOAT_EQ(r.albedo().at(cx, cy, 0), 1.0f);
  EXPECT_FLOAT_EQ(p.at(cx, cy, 0), 1.0f);
}

TEST(Render, BrighterProjectorMovesFurther) {
  SceneConfig hi = car(), lo = car();
  hi.projector_lumens = 6000;
  lo.projector_lumens = 1800;
  const Patch p = Patch::filled(8, 0.6f);
  const SceneRenderer rh(hi), rl(lo);
  EXPECT_GT(norms(rh.projection(p), rh.clean()).l2, norms(rl.projection(p), rl.clean()).l2);
}

TEST(Stereo, ZeroBaselineIsMonocular) {
  StereoRig rig{0.0, 0.0, 0.0};
  const auto [l, r] = stereo_renderers(car(), rig);
  EXPECT_EQ(l.clean(), r.clean());
}

TEST(Stereo, LeftLensMatchesMonocular) {
  StereoRig rig{0.12, 0.0, 5.0};
  EXPECT_EQ(stereo_renderers(car(), rig).first.clean(), render_clean(car()));
}

TEST(Stereo, OffsetLensesDiffer) {
  StereoRig rig{0.0, -2.0, 2.0};
  const auto [l, r] = stereo_renderers(car(), rig);
  EXPECT_GT(norms(l.clean(), r.clean()).l0_pct, 0.0);
}

TEST(SceneConfig, InvalidValuesThrow) {
  SceneConfig c = car();
  c.distance_m = 0;
  EXPECT_THROW(c.validate(), Error);
  c = car();
  c.surface_albedo = {1.2, 0, 0};
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(parse_object("truck"), Error);
}

TEST(Capture, ZeroSigmaIsIdentity) {
  const Image scene = render_clean(car());
  RngStream rng(1, 1);
  EXPECT_EQ(capture(scene, ChannelParams::ideal(), rng), scene);
}

TEST(Capture, SameStreamSameFrame) {
  const Image scene = render_clean(car());
  RngStream a(3, 3), b(3, 3);
  EXPECT_EQ(capture(scene, {}, a), capture(scene, {}, b));
}

TEST(Capture, ConsecutiveFramesDifferInMostPixels) {
  const Image scene = render_clean(car());
  RngStream rng(9, 0);
  double sum = 0;
  for (int i = 0; i < 20; ++i) sum += norms(capture(scene, {}, rng), capture(scene, {}, rng)).l0_pct;
  EXPECT_GE(sum / 20, 68.0);
  EXPECT_LE(sum / 20, 88.0);
}

TEST(Capture, MidGrayCalibrationBand) {
  // Code 128 rather than 0.5: 0.5 sits on a rounding boundary, where any noise
  // at all flips each channel half the time.
  const Image gray(64, 64, 128.0f / 255.0f);
  RngStream rng(9, 1);
  double sum = 0;
  for (int i = 0; i < 100; ++i) {
    const Image first = capture(gray, {}, rng);
    sum += norms(first, capture(gray, {}, rng)).l0_pct;
  }
  EXPECT_GE(sum / 100, 68.0);
  EXPECT_LE(sum / 100, 88.0);
}

TEST(Print, IdentityChannelPreservesPatch) {
  RngStream rng(4, 4);
  Patch p = init_random_patch(16, rng);
  p.raster = snap_to_8bit(p.raster);
  EXPECT_EQ(norms(print_patch(p, ChannelParams::ideal()).raster, p.raster).linf, 0);
}

TEST(Print, TwoLevelsGiveBinaryChannels) {
  RngStream rng(5, 5);
  ChannelParams c;
  c.print_quant_levels = 2;
  const Patch printed = print_patch(init_random_patch(8, rng), c);
  for (float v : printed.raster.data()) EXPECT_TRUE(v == 0.0f || v == 1.0f);
}

TEST(Print, DefaultChangesAlmostEveryPixel) {
  RngStream rng(6, 6);
  const Patch p = init_random_patch(32, rng);
  EXPECT_GE(norms(print_patch(p, {}).raster, p.raster).l0_pct, 95.0);
}

TEST(Print, IsIdempotentOnItsOwnOutputForIdentityMatrix) {
  ChannelParams c;
  c.print_matrix = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  c.print_gamma = 1.0;
  RngStream rng(7, 7);
  const Patch once = print_patch(init_random_patch(8, rng), c);
  EXPECT_EQ(print_patch(once, c), once);
}

TEST(Discrepancy, OneLevelInOnePixel) {
  Image a(2, 2, 0.0f), b(2, 2, 0.0f);
  b.at(0, 1, 2) = 1.0f / 255.0f;
  EXPECT_EQ(channel_discrepancy_report(a, b), (NormTriple{1.0, 1, 25.0}));
}

TEST(Patch, RandomInitDeterministicAndInRange) {
  RngStream a(8, 1), b(8, 1);
  const Patch p = init_random_patch(16, a);
  EXPECT_EQ(p, init_random_patch(16, b));
  EXPECT_EQ(p.raster.data().size(), 16u * 16u * 3u);
  for (float v : p.raster.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}
