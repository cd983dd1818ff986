#include <gtest/gtest.h>

#include <cmath>

#include "expect_error.hpp"
#include "sadq/train/replay_buffer.hpp"

namespace sadq {
namespace {

Transition make(double tag, std::size_t dim = 2) {
  Transition t;
  t.s.assign(dim, tag);
  t.a = ActionId(static_cast<std::size_t>(tag) % 3);
  t.r = -tag;
  t.s_next.assign(dim, tag + 0.5);
  t.done = static_cast<int>(tag) % 2 == 0;
  return t;
}

TEST(ReplayBuffer, RingDropsOldest) {
  ReplayBuffer buf(2, 2);
  for (double tag : {1.0, 2.0, 3.0}) buf.push(make(tag));
  EXPECT_EQ(buf.size(), 2u);
  EXPECT_EQ(buf.at(0).s[0], 2.0);
  EXPECT_EQ(buf.at(1).s[0], 3.0);
}

TEST(ReplayBuffer, SingleItemSampled) {
  ReplayBuffer buf(10, 2);
  buf.push(make(7.0));
  Rng rng(0);
  const Batch b = buf.sample(1, rng);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.s(0, 0), 7.0);
  EXPECT_EQ(b.s_next(0, 1), 7.5);
  EXPECT_EQ(b.r[0], -7.0);
  EXPECT_EQ(b.a[0], 1u);
  EXPECT_EQ(b.done[0], 0);
}

TEST(ReplayBuffer, OversizedSampleUsesReplacement) {
  ReplayBuffer buf(10, 2);
  buf.push(make(1.0));
  buf.push(make(2.0));
  Rng rng(1);
  EXPECT_EQ(buf.sample(50, rng).size(), 50u);
}

TEST(ReplayBuffer, TableCapacityAccepted) {
  ReplayBuffer buf(100000, 4);
  EXPECT_EQ(buf.capacity(), 100000u);
}

TEST(ReplayBuffer, UniformSamplingWithinThreeSigma) {
  constexpr std::size_t kSize = 20;
  constexpr std::size_t kDraws = 100000;
  ReplayBuffer buf(kSize, 1);
  for (std::size_t i = 0; i < kSize; ++i) buf.push(make(static_cast<double>(i), 1));
  Rng rng(2);
  std::vector<int> counts(kSize, 0);
  for (auto idx : buf.sample_indices(kDraws, rng)) ++counts[idx];
  const double p = 1.0 / kSize;
  const double sigma = std::sqrt(kDraws * p * (1 - p));
  for (int c : counts) EXPECT_LT(std::abs(c - kDraws * p), 3 * sigma);
}

TEST(ReplayBuffer, SeededSamplingDeterministic) {
  ReplayBuffer buf(50, 2);
  for (int i = 0; i < 30; ++i) buf.push(make(i));
  Rng a(3), b(3);
  EXPECT_EQ(buf.sample_indices(100, a), buf.sample_indices(100, b));
}

TEST(ReplayBuffer, GatherPreservesInsertionOrderIndexing) {
  ReplayBuffer buf(3, 2);
  for (double tag : {1.0, 2.0, 3.0, 4.0, 5.0}) buf.push(make(tag));
  const Batch b = buf.gather({2, 0, 1});
  EXPECT_EQ(b.s(0, 0), 5.0);
  EXPECT_EQ(b.s(1, 0), 3.0);
  EXPECT_EQ(b.s(2, 0), 4.0);
}

TEST(ReplayBuffer, Errors) {
  ReplayBuffer buf(4, 2);
  Rng rng(0);
  EXPECT_SADQ_ERROR(buf.sample(1, rng), ErrorKind::kEmptyBuffer);
  EXPECT_SADQ_ERROR(buf.push(make(1.0, 3)), ErrorKind::kShapeMismatch);
  auto bad = make(1.0);
  bad.r = std::nan("");
  EXPECT_SADQ_ERROR(buf.push(bad), ErrorKind::kConfigInvalid);
  EXPECT_EQ(buf.size(), 0u);
}

TEST(ReplayBuffer, SaveLoadRoundTrip) {
  ReplayBuffer a(5, 2);
  for (int i = 0; i < 8; ++i) a.push(make(i));
  ByteWriter w;
  a.save(w);
  ReplayBuffer b(5, 2);
  ByteReader r(w.bytes());
  b.load(r);
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.at(i).s, b.at(i).s);
    EXPECT_EQ(a.at(i).a, b.at(i).a);
    EXPECT_EQ(a.at(i).done, b.at(i).done);
  }
  b.push(make(100));
  a.push(make(100));
  EXPECT_EQ(a.at(0).s, b.at(0).s);
}

TEST(EpsilonSchedule, CartPoleRow) {
  const EpsilonSchedule e{0.95, 0.1, 10000};
  EXPECT_EQ(e.at(0), 0.95);
  EXPECT_NEAR(e.at(5000), 0.525, 1e-12);
  EXPECT_EQ(e.at(10000), 0.1);
  EXPECT_EQ(e.at(50000), 0.1);
}

TEST(EpsilonSchedule, BitFlipConstant) {
  const EpsilonSchedule e{0.2, 0.2, 100};
  for (std::uint64_t s : {0, 50, 100, 100000}) EXPECT_EQ(e.at(s), 0.2);
}

TEST(EpsilonSchedule, MonotoneDecay) {
  const EpsilonSchedule e{1.0, 0.05, 250000};
  double prev = 2.0;
  for (std::uint64_t s = 0; s <= 300000; s += 1000) {
    const double v = e.at(s);
    EXPECT_LE(v, prev);
    EXPECT_GE(v, 0.05);
    prev = v;
  }
}

TEST(EpsilonSchedule, Validation) {
  EXPECT_SADQ_ERROR((EpsilonSchedule{1.5, 0.1, 10}.validate()), ErrorKind::kConfigInvalid);
  EXPECT_SADQ_ERROR((EpsilonSchedule{0.5, 0.1, 0}.validate()), ErrorKind::kConfigInvalid);
}

}  // namespace
}  // namespace sadq
