#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "headroom/error.hpp"
#include "headroom/query_codec.hpp"
#include "headroom/rng.hpp"

namespace headroom {
namespace {

QueryTokens random_query_tokens(Rng& rng) {
  QueryTokens tokens{};
  for (auto& t : tokens) t = static_cast<std::uint8_t>(rng.below(64));
  return tokens;
}

TEST(QueryCodecTest, AllZeroTokensSelectTheFirstTable) {
  const auto& catalog = testing::ab_catalog();
  EXPECT_EQ(print_sql(decode_query(QueryTokens{}, catalog), catalog), "SELECT COUNT(*) FROM A;");
}

TEST(QueryCodecTest, OneJoinFromTheFrontier) {
  const auto& catalog = testing::ab_catalog();
  QueryTokens tokens{};
  tokens[QueryLayout::kJoinCount] = 1;
  EXPECT_EQ(print_sql(decode_query(tokens, catalog), catalog), "SELECT COUNT(*) FROM A, B WHERE A.x = B.y;");
}

TEST(QueryCodecTest, PredicateSlot) {
  const auto& catalog = testing::ab_catalog();
  QueryTokens tokens{};
  tokens[QueryLayout::kFirstPredicate] = 1;      // first filterable column of A: c
  tokens[QueryLayout::kFirstPredicate + 1] = 1;  // <
  tokens[QueryLayout::kFirstPredicate + 2] = 15;  // largest anchor
  const auto q = decode_query(tokens, catalog);
  ASSERT_EQ(q.predicates.size(), 1u);
  EXPECT_EQ(q.predicates[0].op, CmpOp::Lt);
  EXPECT_EQ(q.predicates[0].literal, catalog.anchors({0, 1})[15]);
}

TEST(QueryCodecTest, SingleTableRoundTrip) {
  const auto& catalog = testing::ab_catalog();
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A;");
  EXPECT_EQ(encode_query(q, catalog), QueryTokens{});
  EXPECT_EQ(decode_query(encode_query(q, catalog), catalog), q);
}

TEST(QueryCodecTest, ThreeTablesTwoPredicatesRoundTrip) {
  const auto& catalog = testing::chain_catalog();
  const auto grp = catalog.anchors({0, 1})[4];
  const auto tag = catalog.anchors({2, 2})[9];
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM C, B, A WHERE C.tag <> " + format_literal(tag) +
                                           " AND B.a_id = A.id AND C.b_id = B.id AND A.grp >= " +
                                           format_literal(grp) + ";");
  const auto tokens = encode_query(q, catalog);
  EXPECT_EQ(decode_query(tokens, catalog), q);
  EXPECT_EQ(tokens[QueryLayout::kJoinCount], 2);
}

TEST(QueryCodecTest, CapacityAndVocabularyErrors) {
  const auto& catalog = testing::chain_catalog();
  ConjunctiveQuery q = testing::sql(catalog, "SELECT COUNT(*) FROM A;");
  for (int i = 0; i < 9; ++i) q.predicates.push_back({{0, 1}, kCmpOps[i % 6], catalog.anchors({0, 1})[i]});
  q.canonicalize();
  ASSERT_EQ(q.predicates.size(), 9u);
  EXPECT_THROW(encode_query(q, catalog), Error);

  auto off_anchor = testing::sql(catalog, "SELECT COUNT(*) FROM A WHERE A.grp = 12345;");
  EXPECT_THROW(encode_query(off_anchor, catalog), Error);
}

// Property: decode is total, its output is valid and canonical, and encoding is its right inverse.
TEST(QueryCodecProperty, DecodeIsTotalAndEncodable) {
  for (const auto* catalog : {&testing::ab_catalog(), &testing::chain_catalog(), &testing::five_catalog(),
                              &testing::four_catalog()}) {
    Rng rng(2024);
    for (int trial = 0; trial < 400; ++trial) {
      const auto q = decode_query(random_query_tokens(rng), *catalog);
      ASSERT_TRUE(validate_query(q, *catalog).empty());
      auto copy = q;
      copy.canonicalize();
      EXPECT_EQ(copy, q);
      EXPECT_EQ(implied_edges(q.table_mask(), *catalog), q.joins);
      const auto tokens = encode_query(q, *catalog);
      EXPECT_EQ(decode_query(tokens, *catalog), q);
      EXPECT_EQ(encode_query(decode_query(tokens, *catalog), *catalog), tokens);
    }
  }
}

TEST(QueryCodecProperty, JoinCountIsCappedByTables) {
  const auto& catalog = testing::five_catalog();
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto tokens = random_query_tokens(rng);
    tokens[QueryLayout::kJoinCount] = 63;
    EXPECT_EQ(decode_query(tokens, catalog).tables.size(), 63 % 5 + 1u);
  }
}

}  // namespace
}  // namespace headroom
