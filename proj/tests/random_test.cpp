#include "qcheck/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

namespace qcheck {
namespace {

TEST(Random, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.bits(), b.bits());
}

TEST(Random, PathsGiveDistinctStreams) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t r = 0; r < 200; ++r) firsts.insert(Rng(7, {1, r}).bits());
  EXPECT_EQ(firsts.size(), 200u);
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {}), derive_seed(8, {}));
}

TEST(Random, UniformRangeAndMean) {
  Rng rng(1);
  double sum = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Random, NormalMoments) {
  Rng rng(2);
  double s1 = 0, s2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Random, IndexIsUniform) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int k = 0; k < n; ++k) ++counts[rng.index(7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7, 400);
  EXPECT_EQ(rng.index(1), 0u);
}

TEST(Random, StreamIdTreatsSignedZeroAlike) {
  EXPECT_EQ(stream_id(0.0), stream_id(-0.0));
  EXPECT_NE(stream_id(0.25), stream_id(0.5));
}

}  // namespace
}  // namespace qcheck
