#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "expect_error.hpp"
#include "sadq/common/bytes.hpp"
#include "sadq/common/rng.hpp"

namespace sadq {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StateRoundTripContinuesStream) {
  Rng a(7);
  for (int i = 0; i < 10; ++i) a.uniform();
  Rng b;
  b.set_state(a.state());
  EXPECT_TRUE(a == b);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Rng, MalformedStateRejected) {
  Rng r;
  EXPECT_SADQ_ERROR(r.set_state("not a state"), ErrorKind::kParseError);
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, IndexFrequenciesWithinThreeSigma) {
  Rng r(3);
  constexpr int kN = 7;
  constexpr int kDraws = 100000;
  std::vector<int> counts(kN, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[r.index(kN)];
  const double p = 1.0 / kN;
  const double sigma = std::sqrt(kDraws * p * (1 - p));
  for (int c : counts) EXPECT_LT(std::abs(c - kDraws * p), 3 * sigma);
}

TEST(Rng, NormalMoments) {
  Rng r(5);
  constexpr int kDraws = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / kDraws;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(kDraws));
  EXPECT_NEAR(sq / kDraws - mean * mean, 1.0, 0.02);
}

TEST(Rng, ExponentialMean) {
  Rng r(9);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += r.exponential(0.4);
  EXPECT_NEAR(sum / 100000, 0.4, 0.01);
}

TEST(Rng, MixSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::uint64_t stream = 0; stream < 10; ++stream) seen.insert(mix_seed(seed, stream));
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(mix_seed(3, 4), mix_seed(3, 4));
}

TEST(Bytes, RoundTrip) {
  ByteWriter w;
  w.put<std::uint32_t>(17);
  w.put(-2.5);
  w.put_bool(true);
  w.put_string("hello");
  w.put_doubles(std::vector<double>{1.0, std::nan(""), -0.0});
  ByteReader r(w.bytes());
  EXPECT_EQ(r.get<std::uint32_t>(), 17u);
  EXPECT_EQ(r.get<double>(), -2.5);
  EXPECT_TRUE(r.get_bool());
  EXPECT_EQ(r.get_string(), "hello");
  const auto v = r.get_doubles();
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_TRUE(std::isnan(v[1]));
  EXPECT_TRUE(std::signbit(v[2]));
  EXPECT_TRUE(r.at_end());
}

TEST(Bytes, TruncatedReadFails) {
  ByteWriter w;
  w.put_string("abcdef");
  const std::string cut = w.bytes().substr(0, w.bytes().size() - 2);
  ByteReader r(cut);
  EXPECT_SADQ_ERROR(r.get_string(), ErrorKind::kCorruptChecksum);
}

TEST(Error, MessageCarriesKind) {
  try {
    fail(ErrorKind::kMissingKey, "q_loss");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingKey);
    EXPECT_EQ(std::string(e.what()), "MissingKey: q_loss");
  }
}

}  // namespace
}  // namespace sadq
