#include <gtest/gtest.h>

#include <string>

#include "fixtures.hpp"
#include "headroom/error.hpp"
#include "headroom/plan.hpp"

namespace headroom {
namespace {

const char* kChainJoin = "SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id;";

TEST(PlanTest, TextOfNestedJoin) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, kChainJoin);
  const auto ab = join_for(q, JoinOp::NestedLoopJoin, scan_for(q, 0), scan_for(q, 1), catalog);
  const auto plan = join_for(q, JoinOp::HashJoinBuildLeft, ab, scan_for(q, 2), catalog);
  EXPECT_EQ(plan.to_text(catalog), "(HashJoinBuildLeft (NestedLoopJoin A B) C)");
  EXPECT_EQ(plan.join_count(), 2u);
  EXPECT_EQ(plan.tables(), 7u);
  EXPECT_TRUE(validate_plan(plan, q, catalog).empty());
}

TEST(PlanTest, ChildrenAreCanonicalAndBuildSideMirrors) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, kChainJoin);
  const auto bc = join_for(q, JoinOp::HashJoinBuildLeft, scan_for(q, 2), scan_for(q, 1), catalog);
  EXPECT_EQ(bc.to_text(catalog), "(HashJoinBuildRight B C)");
  const auto nlj = join_for(q, JoinOp::NestedLoopJoin, scan_for(q, 2), scan_for(q, 1), catalog);
  EXPECT_EQ(nlj.to_text(catalog), "(NestedLoopJoin B C)");
}

TEST(PlanTest, ParseTextRoundTrip) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, kChainJoin);
  for (const std::string text : {"(HashJoinBuildLeft (NestedLoopJoin A B) C)", "(NestedLoopJoin A (HashJoinBuildRight B C))"}) {
    EXPECT_EQ(parse_plan_text(text, q, catalog).to_text(catalog), text);
  }
  EXPECT_EQ(parse_plan_text("(HashJoinBuildLeft C (NestedLoopJoin B A))", q, catalog).to_text(catalog),
            "(HashJoinBuildRight (NestedLoopJoin A B) C)");
}

TEST(PlanTest, InvalidPlanText) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, kChainJoin);
  EXPECT_THROW(parse_plan_text("(HashJoinBuildLeft A C)", q, catalog), Error);
  EXPECT_THROW(parse_plan_text("(HashJoinBuildLeft (NestedLoopJoin A B) D)", q, catalog), Error);
  EXPECT_THROW(parse_plan_text("(MergeJoin (NestedLoopJoin A B) C)", q, catalog), Error);
  EXPECT_THROW(parse_plan_text("(NestedLoopJoin A B)", q, catalog), Error);
}

TEST(PlanTest, ValidatePlanRejectsMissingTables) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, kChainJoin);
  const auto partial = join_for(q, JoinOp::NestedLoopJoin, scan_for(q, 0), scan_for(q, 1), catalog);
  EXPECT_FALSE(validate_plan(partial, q, catalog).empty());
}

TEST(PlanTest, ScansCarryTheirFilters) {
  const auto& catalog = testing::chain_catalog();
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B WHERE B.a_id = A.id AND A.grp = 1 AND B.score > 2;");
  EXPECT_EQ(scan_for(q, 0).root().filters.size(), 1u);
  EXPECT_EQ(filters_for(q, 1).size(), 1u);
  EXPECT_EQ(connecting_edges(q, 0b01, 0b10, catalog).size(), 1u);
}

}  // namespace
}  // namespace headroom
