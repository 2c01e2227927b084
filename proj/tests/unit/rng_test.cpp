#include <gtest/gtest.h>

#include "zzsim/rng.hpp"

using zzsim::RngStream;

TEST(RngStream, SameSeedAndNameRepeat) {
  RngStream a(7, "loss"), b(7, "loss");
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(RngStream, NamesAndSeedsSeparateStreams) {
  RngStream a(7, "loss"), b(7, "jitter"), c(8, "loss");
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    same_ab += x == b.next();
    same_ac += x == c.next();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, UniformStaysInUnitInterval) {
  RngStream r(1, "u");
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(RngStream, BernoulliEdges) {
  RngStream r(1, "b");
  for (int i = 0; i < 1000; ++i) {
    ASSERT_FALSE(r.bernoulli(0.0));
    ASSERT_TRUE(r.bernoulli(1.0));
  }
}
