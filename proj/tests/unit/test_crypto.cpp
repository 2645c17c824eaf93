#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mservice/crypto.hpp"

using namespace mservice;

TEST(SeededRandom, SameSeedSameStream) {
  SeededRandom a(7, "x"), b(7, "x");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(SeededRandom, StreamsAndSeedsDiffer) {
  SeededRandom a(7, "x"), b(7, "y"), c(8, "x");
  auto va = a.next_u64();
  EXPECT_NE(va, b.next_u64());
  EXPECT_NE(va, c.next_u64());
}

TEST(SeededRandom, DigitsAndHex) {
  SeededRandom r(1, "codes");
  for (int i = 0; i < 200; ++i) {
    auto d = r.digits(6);
    ASSERT_EQ(d.size(), 6u);
    for (char c : d) ASSERT_TRUE(c >= '0' && c <= '9');
  }
  auto h = r.hex(8);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
}

TEST(SeededRandom, UniformStaysInBounds) {
  SeededRandom r(3, "bounds");
  for (std::uint64_t bound : {1ull, 2ull, 3ull, 7ull, 1000ull}) {
    for (int i = 0; i < 500; ++i) ASSERT_LT(r.uniform(bound), bound);
  }
}

// Chi-square over 10 buckets, 20000 draws. The 0.999 quantile for 9
// degrees of freedom is 27.88.
TEST(SeededRandom, UniformPassesChiSquare) {
  SeededRandom r(11, "chi");
  constexpr int kBuckets = 10, kDraws = 20000;
  int counts[kBuckets] = {};
  for (int i = 0; i < kDraws; ++i) ++counts[r.uniform(kBuckets)];
  double chi = 0;
  const double expected = static_cast<double>(kDraws) / kBuckets;
  for (int c : counts) chi += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi, 27.88);
}

TEST(SeededRandom, SeededUniformIsPure) {
  EXPECT_EQ(seeded_uniform(5, "s", 1000), seeded_uniform(5, "s", 1000));
  std::set<std::uint64_t> seen;
  for (std::uint64_t n = 0; n < 50; ++n) seen.insert(seeded_uniform(mix_seed(5, n), "s", 1000000));
  EXPECT_GT(seen.size(), 45u);
}

TEST(MixSeed, Distinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t n = 0; n < 1000; ++n) seen.insert(mix_seed(42, n));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Tokens, FreshAndHex) {
  auto a = random_token(), b = random_token();
  EXPECT_EQ(a.size(), 64u);
  EXPECT_NE(a, b);
  EXPECT_NE(fresh_seed(), fresh_seed());
}

TEST(Password, HashVerify) {
  auto h = hash_password("siri-yangu", PwhashProfile::Minimal);
  EXPECT_NE(h.find("argon2id"), std::string::npos);
  EXPECT_TRUE(verify_password(h, "siri-yangu"));
  EXPECT_FALSE(verify_password(h, "siri-yako"));
  EXPECT_FALSE(verify_password("garbage", "siri-yangu"));
  EXPECT_NE(h, hash_password("siri-yangu", PwhashProfile::Minimal));  // salted
}
