#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "headroom/error.hpp"
#include "headroom/latent.hpp"
#include "headroom/rng.hpp"

namespace headroom {
namespace {

TEST(LatentTest, ZeroVectorQuantizesToMidpoint) {
  const auto& catalog = testing::chain_catalog();
  const LatentVector z{};
  const auto pair = decode_latent(z, catalog);
  for (auto t : pair.query_tokens) EXPECT_EQ(t, 32);
  for (auto t : pair.plan_tokens) EXPECT_EQ(t, 32);
  QueryTokens qt;
  qt.fill(32);
  PlanTokens pt;
  pt.fill(32);
  EXPECT_EQ(pair.query, decode_query(qt, catalog));
  EXPECT_EQ(pair.plan, decode_plan(pt, pair.query, catalog));
}

TEST(LatentTest, Saturation) {
  EXPECT_EQ(quantize(-1e9), 0);
  EXPECT_EQ(quantize(1e9), 63);
  EXPECT_EQ(quantize(-std::numeric_limits<double>::max()), 0);
  EXPECT_THROW(quantize(std::nan("")), Error);
}

TEST(LatentTest, BucketCenters) {
  // logit(1/128) = log(1/127) = -4.8442.
  EXPECT_NEAR(bucket_center(0), std::log(1.0 / 127.0), 1e-12);
  EXPECT_NEAR(bucket_center(63), std::log(127.0), 1e-12);
  EXPECT_NEAR(bucket_center(0), -4.8442, 5e-5);
  for (int t = 0; t < 64; ++t) {
    EXPECT_EQ(quantize(bucket_center(static_cast<std::uint8_t>(t))), t);
    EXPECT_NEAR(bucket_center(static_cast<std::uint8_t>(t)), -bucket_center(static_cast<std::uint8_t>(63 - t)), 1e-12);
  }
}

TEST(LatentTest, DecodeIsLocallyConstant) {
  const auto& catalog = testing::five_catalog();
  Rng rng(3);
  LatentVector z;
  for (auto& v : z) v = bucket_center(static_cast<std::uint8_t>(rng.below(64)));
  const auto base = decode_latent(z, catalog);
  for (auto& v : z) v += 0.001 * (rng.uniform() - 0.5);
  const auto moved = decode_latent(z, catalog);
  EXPECT_EQ(moved.query, base.query);
  EXPECT_EQ(moved.plan, base.plan);
}

// Property: encode_pair is an exact right inverse of decode_latent on canonical pairs.
TEST(LatentProperty, EncodeDecodeRoundTrip) {
  const auto& catalog = testing::five_catalog();
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    LatentVector z;
    for (auto& v : z) v = rng.uniform(-kLatentBound, kLatentBound);
    const auto pair = decode_latent(z, catalog);
    const auto encoded = encode_pair(pair.query, pair.plan, catalog);
    for (double v : encoded) EXPECT_LT(std::abs(v), kLatentBound);
    const auto again = decode_latent(encoded, catalog);
    EXPECT_EQ(again.query, pair.query);
    EXPECT_EQ(again.plan, pair.plan);
    EXPECT_EQ(encode_pair(again.query, again.plan, catalog), encoded);
  }
}

}  // namespace
}  // namespace headroom
