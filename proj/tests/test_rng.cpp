#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "projlab/rng.hpp"

using namespace projlab;

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                        {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, SameSeedAndStreamReplays) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u32(), b.next_u32());
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(42, 7), b(42, 8), c(43, 7);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 256; ++i) {
    const auto v = a.next_u32();
    same_b += v == b.next_u32();
    same_c += v == c.next_u32();
  }
  EXPECT_LT(same_b, 3);
  EXPECT_LT(same_c, 3);
}

TEST(RngStream, StartingBlockSkipsAhead) {
  RngStream a(5, 9);
  for (int i = 0; i < 8; ++i) a.next_u32();
  RngStream b(5, 9, 2);
  for (int i = 0; i < 16; ++i) ASSERT_EQ(a.next_u32(), b.next_u32());
}

TEST(RngStream, UniformInUnitInterval) {
  RngStream r(1, 2);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(RngStream, BelowCoversRangeEvenly) {
  RngStream r(3, 4);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(RngStream, NormalMoments) {
  RngStream r(11, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(RngStream, RademacherIsSigned) {
  RngStream r(8, 8);
  int plus = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = r.rademacher();
    ASSERT_TRUE(v == 1.0 || v == -1.0);
    plus += v > 0;
  }
  EXPECT_NEAR(plus, 5000, 200);
}

TEST(RngStream, ShufflePermutes) {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  RngStream r(1, 1);
  shuffle(v, r);
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
  bool moved = false;
  for (int i = 0; i < 50; ++i) moved |= v[i] != i;
  EXPECT_TRUE(moved);
}

TEST(StreamId, OrderMatters) {
  EXPECT_NE(stream_id({1, 2}), stream_id({2, 1}));
  EXPECT_EQ(stream_id({1, 2}), stream_id({1, 2}));
}
