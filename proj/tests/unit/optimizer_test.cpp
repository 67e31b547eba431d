#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <string>

#include "fixtures.hpp"
#include "headroom/executor.hpp"
#include "headroom/optimizer.hpp"
#include "headroom/plan_codec.hpp"
#include "headroom/query_codec.hpp"
#include "headroom/rng.hpp"
#include "headroom/statistics.hpp"

namespace headroom {
namespace {

std::vector<std::int64_t> iota(std::int64_t n, std::int64_t mod = 0) {
  std::vector<std::int64_t> v;
  for (std::int64_t i = 0; i < n; ++i) v.push_back(mod ? i % mod : i);
  return v;
}

double brute_force_min_cost(const ConjunctiveQuery& q, const Catalog& catalog, const Statistics& stats) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& plan : enumerate_plans(q, catalog)) best = std::min(best, cost_plan(plan, q, catalog, stats).estimated_cost);
  return best;
}

TEST(EstimatorTest, UnfilteredTable) {
  const auto catalog = testing::two_table(iota(100), iota(5));
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A;");
  EXPECT_DOUBLE_EQ(CardinalityEstimator(q, catalog, stats).scan_rows(0), 100.0);
  const auto costed = cost_plan(scan_for(q, 0), q, catalog, stats);
  EXPECT_DOUBLE_EQ(costed.estimated_cost, 100.0);
  EXPECT_DOUBLE_EQ(costed.estimated_rows, 100.0);
}

TEST(EstimatorTest, EqualityUsesDistinctCount) {
  const auto catalog = testing::two_table(iota(100, 10), iota(5));
  const auto stats = build_stats(catalog);
  EXPECT_EQ(stats.column({0, 0}).distinct_count, 10u);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A WHERE A.x = 4;");
  EXPECT_DOUBLE_EQ(CardinalityEstimator(q, catalog, stats).scan_rows(0), 10.0);
}

TEST(EstimatorTest, RedundantPredicatesAreUnderestimated) {
  const auto catalog = generate_synthetic(parse_generator_spec(parse_schema_config(R"({
    "tables": [{"name": "t", "columns": [
      {"name": "id", "type": "integer"}, {"name": "a", "type": "integer", "filterable": true},
      {"name": "b", "type": "integer", "filterable": true}]}],
    "generator": {"seed": 1, "tables": {"t": {"rows": 100, "columns": {"id": {"dist": "sequential"}}}},
      "correlations": [{"table": "t", "target": "a", "source": "id", "fn": "mod", "arg": 10},
                       {"table": "t", "target": "b", "source": "id", "fn": "mod", "arg": 10}]}})")));
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM t WHERE t.a = 3 AND t.b = 3;");
  EXPECT_NEAR(CardinalityEstimator(q, catalog, stats).scan_rows(0), 1.0, 1e-12);
  EXPECT_EQ(naive_count_oracle(q, catalog), 10u);
}

TEST(CostTest, JoinFormulas) {
  EXPECT_DOUBLE_EQ(join_cost(JoinOp::NestedLoopJoin, 10, 10, 10), 110.0);
  EXPECT_DOUBLE_EQ(join_cost(JoinOp::HashJoinBuildLeft, 10, 10, 10), 30.0);
  EXPECT_DOUBLE_EQ(join_cost(JoinOp::HashJoinBuildRight, 10, 10, 10), 30.0);
}

TEST(CostTest, CostPlanOnJoinTree) {
  const auto catalog = testing::two_table(iota(10), iota(10));
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B WHERE A.x = B.y;");
  const auto nlj = join_for(q, JoinOp::NestedLoopJoin, scan_for(q, 0), scan_for(q, 1), catalog);
  const auto hash = join_for(q, JoinOp::HashJoinBuildLeft, scan_for(q, 0), scan_for(q, 1), catalog);
  EXPECT_DOUBLE_EQ(cost_plan(nlj, q, catalog, stats).estimated_rows, 10.0);
  EXPECT_DOUBLE_EQ(cost_plan(nlj, q, catalog, stats).estimated_cost, 20.0 + 110.0);
  EXPECT_DOUBLE_EQ(cost_plan(hash, q, catalog, stats).estimated_cost, 20.0 + 30.0);
}

TEST(OptimizerTest, SingleTableIsAScan) {
  const auto& catalog = testing::chain_catalog();
  const auto stats = build_stats(catalog);
  const auto result = optimize(testing::sql(catalog, "SELECT COUNT(*) FROM B WHERE B.score > 1;"), catalog, stats);
  EXPECT_EQ(result.plan.join_count(), 0u);
  EXPECT_EQ(result.plan.to_text(catalog), "B");
}

TEST(OptimizerTest, FilteredTableJoinsFirst) {
  // A is filtered to about one row, so joining A with B first is cheapest when estimates are faithful.
  const auto& catalog = testing::chain_catalog();
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(
      catalog, "SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id AND A.grp = 1 AND A.name = 'n1';");
  const auto result = optimize(q, catalog, stats);
  EXPECT_DOUBLE_EQ(result.estimated_cost, brute_force_min_cost(q, catalog, stats));
  const auto& root = result.plan.root();
  const auto& left = result.plan.nodes()[root.left];
  EXPECT_FALSE(left.is_scan) << result.plan.to_text(catalog);
  EXPECT_EQ(left.tables, 0b011u) << result.plan.to_text(catalog);
}

TEST(OptimizerTest, TieBreakIsTextual) {
  const auto catalog = testing::two_table(iota(10), iota(10));
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B WHERE A.x = B.y;");
  EXPECT_EQ(optimize(q, catalog, stats).plan.to_text(catalog), "(HashJoinBuildLeft A B)");
}

// Property: the dynamic program finds the brute-force minimum over every valid plan.
TEST(OptimizerProperty, MatchesExhaustiveMinimum) {
  for (const auto* catalog : {&testing::five_catalog(), &testing::four_catalog(), &testing::correlated_catalog()}) {
    const auto stats = build_stats(*catalog);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      QueryTokens tokens{};
      std::uint64_t x = seed + 17;
      for (auto& t : tokens) {
        x = splitmix64(x);
        t = static_cast<std::uint8_t>(x >> 58);
      }
      tokens[1] = static_cast<std::uint8_t>(3 + seed % 2);
      const auto q = decode_query(tokens, *catalog);
      const auto result = optimize(q, *catalog, stats);
      EXPECT_TRUE(validate_plan(result.plan, q, *catalog).empty());
      EXPECT_DOUBLE_EQ(result.estimated_cost, brute_force_min_cost(q, *catalog, stats)) << print_sql(q, *catalog);
      EXPECT_DOUBLE_EQ(cost_plan(result.plan, q, *catalog, stats).estimated_cost, result.estimated_cost);
    }
  }
}

}  // namespace
}  // namespace headroom
