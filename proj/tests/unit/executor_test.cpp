#include <gtest/gtest.h>

#include <string>

#include "fixtures.hpp"
#include "headroom/error.hpp"
#include "headroom/executor.hpp"
#include "headroom/plan_codec.hpp"
#include "headroom/query_codec.hpp"

namespace headroom {
namespace {

TEST(ExecutorTest, EmptyScan) {
  const auto catalog = testing::two_table({}, {1});
  ConjunctiveQuery q;
  q.tables = {0};
  const auto result = execute_plan(scan_for(q, 0), catalog);
  EXPECT_EQ(result.count, 0u);
  EXPECT_EQ(result.work_units, 0u);
  EXPECT_FALSE(result.timed_out);
}

TEST(ExecutorTest, HashJoinWorkUnits) {
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;
  for (std::int64_t i = 0; i < 10; ++i) a.push_back(i);
  for (std::int64_t i = 0; i < 20; ++i) b.push_back(i < 5 ? i : 100 + i);
  const auto catalog = testing::two_table(a, b);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B WHERE A.x = B.y;");
  const auto plan = join_for(q, JoinOp::HashJoinBuildLeft, scan_for(q, 0), scan_for(q, 1), catalog);
  const auto result = execute_plan(plan, catalog);
  EXPECT_EQ(result.count, 5u);
  EXPECT_EQ(result.work_units, 65u);

  const auto nlj = join_for(q, JoinOp::NestedLoopJoin, scan_for(q, 0), scan_for(q, 1), catalog);
  EXPECT_EQ(execute_plan(nlj, catalog).work_units, 10u + 20u + 200u + 5u);
}

TEST(ExecutorTest, FrozenFixtureCounts) {
  const auto& ab = testing::ab_catalog();
  const auto& chain = testing::chain_catalog();
  const std::vector<std::pair<std::string, std::uint64_t>> cases = {
      {"SELECT COUNT(*) FROM A, B WHERE A.x = B.y;", 18},
      {"SELECT COUNT(*) FROM A, B WHERE A.x = B.y AND A.c < 5;", 9},
  };
  for (const auto& [text, expected] : cases) {
    const auto q = testing::sql(ab, text);
    EXPECT_EQ(naive_count_oracle(q, ab), expected) << text;
    for (const auto& plan : enumerate_plans(q, ab)) EXPECT_EQ(execute_plan(plan, ab).count, expected) << text;
  }
  const std::vector<std::pair<std::string, std::uint64_t>> chain_cases = {
      {"SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id;", 30},
      {"SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id AND A.grp = 1 AND C.tag = 'red';", 2},
      {"SELECT COUNT(*) FROM B, C WHERE C.b_id = B.id AND B.score >= 3;", 21},
  };
  for (const auto& [text, expected] : chain_cases) {
    const auto q = testing::sql(chain, text);
    EXPECT_EQ(naive_count_oracle(q, chain), expected) << text;
    for (const auto& plan : enumerate_plans(q, chain)) EXPECT_EQ(execute_plan(plan, chain).count, expected) << text;
  }
}

TEST(OracleTest, HandEnumeratedCounts) {
  const auto catalog = testing::two_table({1, 2}, {2, 3});
  EXPECT_EQ(naive_count_oracle(testing::sql(catalog, "SELECT COUNT(*) FROM A, B WHERE A.x = B.y;"), catalog), 1u);
  const auto single = testing::two_table({1, 2, 3, 4}, {});
  EXPECT_EQ(naive_count_oracle(testing::sql(single, "SELECT COUNT(*) FROM A WHERE A.x < 3;"), single), 2u);
  EXPECT_EQ(naive_count_oracle(testing::sql(single, "SELECT COUNT(*) FROM A, B WHERE A.x = B.y;"), single), 0u);
}

TEST(OracleTest, StepGuard) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id;");
  EXPECT_THROW(naive_count_oracle(q, catalog, 5), Error);
}

TEST(ExecutorTest, WorkCapTimesOut) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id;");
  const auto plan = enumerate_plans(q, catalog).front();
  ExecOptions options;
  options.max_work_units = 40;
  const auto result = execute_plan(plan, catalog, options);
  EXPECT_TRUE(result.timed_out);
  EXPECT_EQ(result.work_units, 40u);
  EXPECT_EQ(result.count, 0u);
}

TEST(ExecutorTest, WallClockModeReportsDuration) {
  const auto& catalog = testing::ab_catalog();
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B WHERE A.x = B.y;");
  ExecOptions options;
  options.mode = ExecMode::WallClock;
  const auto result = execute_plan(enumerate_plans(q, catalog).front(), catalog, options);
  ASSERT_TRUE(result.wall_clock.has_value());
  EXPECT_EQ(result.count, 18u);
}

// Property: on multi-cycle and skewed catalogs every plan of a random query agrees with the oracle.
TEST(ExecutorProperty, AllPlansAgreeWithOracle) {
  for (const auto* catalog : {&testing::five_catalog(), &testing::four_catalog()}) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      QueryTokens tokens{};
      std::uint64_t x = seed * 7919 + 1;
      for (auto& t : tokens) {
        x = x * 6364136223846793005ULL + 1442695040888963407ULL;
        t = static_cast<std::uint8_t>(x >> 58);
      }
      tokens[1] = static_cast<std::uint8_t>(2 + seed % 3);
      const auto q = decode_query(tokens, *catalog);
      const auto expected = naive_count_oracle(q, *catalog);
      for (const auto& plan : enumerate_plans(q, *catalog)) {
        ASSERT_EQ(execute_plan(plan, *catalog).count, expected) << plan.to_text(*catalog);
      }
    }
  }
}

}  // namespace
}  // namespace headroom
