#include <gtest/gtest.h>

#include <filesystem>

#include "projlab/geometry.hpp"
#include "projlab/io.hpp"
#include "projlab/rng.hpp"

using namespace projlab;

namespace {

Image random_image(int w, int h, RngStream& rng) {
  Image img(w, h);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

}  // namespace

TEST(Quantize, MidGrayRoundsUp) {
  EXPECT_EQ(quantize_sample(0.5f), 128);
  EXPECT_EQ(quantize_sample(0.0f), 0);
  EXPECT_EQ(quantize_sample(1.0f), 255);
}

TEST(Quantize, SnapIsIdempotent) {
  RngStream rng(1, 1);
  const Image a = snap_to_8bit(random_image(9, 7, rng));
  EXPECT_EQ(snap_to_8bit(a), a);
}

TEST(Image, RejectsOutOfRangeData) {
  EXPECT_THROW(Image::from_data(1, 1, {0.f, 2.f, 0.f}), Error);
  EXPECT_THROW(Image::from_data(2, 1, {0.f, 0.f, 0.f}), Error);
}

TEST(Ppm, BinaryRoundTripOfQuantizedImage) {
  RngStream rng(2, 2);
  const Image a = snap_to_8bit(random_image(13, 5, rng));
  EXPECT_EQ(decode_ppm(encode_ppm(a)), a);
}

TEST(Ppm, AsciiRoundTrip) {
  RngStream rng(3, 3);
  const Image a = snap_to_8bit(random_image(4, 6, rng));
  EXPECT_EQ(decode_ppm(encode_ppm_ascii(a)), a);
}

TEST(Ppm, HeaderCommentsAreSkipped) {
  const std::string buf = std::string("P6\n# comment\n1 1\n255\n") + '\xff' + '\x00' + '\x80';
  const Image img = decode_ppm(buf);
  EXPECT_FLOAT_EQ(img.at(0, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(img.at(0, 0, 1), 0.0f);
  EXPECT_FLOAT_EQ(img.at(0, 0, 2), 128.0f / 255.0f);
}

TEST(Ppm, MalformedInputs) {
  EXPECT_THROW(decode_ppm("P5\n1 1\n255\n\x01"), Error);
  EXPECT_THROW(decode_ppm("P6\n2 2\n255\n\x01\x02"), Error);
  EXPECT_THROW(decode_ppm("P6\n1 1\n65535\n\x01\x02\x03\x04\x05\x06"), Error);
  EXPECT_THROW(decode_ppm(""), Error);
}

TEST(Pfm, RoundTripIsExact) {
  RngStream rng(4, 4);
  const Image a = random_image(7, 3, rng);
  EXPECT_EQ(decode_pfm(encode_pfm(a)), a);
}

TEST(Pfm, TruncatedDataThrows) {
  RngStream rng(4, 5);
  const std::string buf = encode_pfm(random_image(3, 3, rng));
  EXPECT_THROW(decode_pfm(buf.substr(0, buf.size() - 4)), Error);
}

TEST(Pfm, FileRoundTrip) {
  RngStream rng(5, 5);
  const Image a = random_image(6, 6, rng);
  const auto path = std::filesystem::temp_directory_path() / "projlab_test_roundtrip.pfm";
  write_pfm(path, a);
  EXPECT_EQ(read_pfm(path), a);
  std::filesystem::remove(path);
}

TEST(Warp, IdentityLeavesImageUnchanged) {
  RngStream rng(6, 6);
  const Image a = random_image(10, 8, rng);
  const WarpResult r = warp(a, Homography::identity(), 10, 8);
  EXPECT_EQ(r.image, a);
}

TEST(Warp, IntegerTranslationShiftsPixels) {
  RngStream rng(7, 7);
  const Image a = random_image(10, 8, rng);
  const WarpResult r = warp(a, Homography::translation(2, 1), 10, 8);
  for (int y = 1; y < 8; ++y)
    for (int x = 2; x < 10; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_FLOAT_EQ(r.image.at(x, y, c), a.at(x - 2, y - 1, c));
}

TEST(Homography, InverseComposesToIdentity) {
  const Homography h = Homography::rotation(17.0, 4, 3) * Homography::scale(1.3, 0.8) * Homography::translation(2, -5);
  const Homography i = h * h.inverse();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(i(r, c) / i(2, 2), r == c ? 1.0 : 0.0, 1e-12);
}

TEST(Homography, SingularInverseThrows) {
  EXPECT_THROW(Homography::scale(0.0, 1.0).inverse(), Error);
}

TEST(Hflip, IsAnInvolution) {
  RngStream rng(8, 8);
  const Image a = random_image(9, 4, rng);
  EXPECT_EQ(hflip(hflip(a)), a);
  EXPECT_FLOAT_EQ(hflip(a).at(0, 0, 1), a.at(8, 0, 1));
}

TEST(Blur, PreservesConstantsAndMean) {
  std::vector<double> flat(30, 0.4);
  for (double v : blur_binomial(flat, 6, 5, 3)) EXPECT_NEAR(v, 0.4, 1e-12);
  std::vector<double> impulse(49, 0.0);
  impulse[24] = 1.0;
  const auto b = blur_binomial(impulse, 7, 7, 1);
  double sum = 0;
  for (double v : b) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(b[24], 36.0 / 256.0, 1e-12);
}

TEST(Gray, Rec601Weights) {
  Image img(1, 1);
  img.at(0, 0, 0) = 1.0f;
  EXPECT_NEAR(to_gray(img)[0], 0.299, 1e-6);
}
