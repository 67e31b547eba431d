#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "fixtures.hpp"
#include "headroom/bo.hpp"
#include "headroom/error.hpp"
#include "headroom/executor.hpp"
#include "headroom/optimizer.hpp"
#include "headroom/plan_codec.hpp"
#include "headroom/statistics.hpp"

namespace headroom {
namespace {

const char* kCorrelatedQuery =
    "SELECT COUNT(*) FROM customer, item, orders, store WHERE orders.customer_id = customer.id AND "
    "orders.item_id = item.id AND orders.store_id = store.id AND item.color = 17 AND item.shade = 17;";

const Statistics& four_stats() {
  static const Statistics stats = build_stats(testing::four_catalog());
  return stats;
}

RunConfig small_config(std::uint64_t seed) {
  RunConfig config;
  config.seed = seed;
  config.iterations = 6;
  config.initial_samples = 10;
  config.batch_size = 3;
  config.local_candidates = 48;
  config.global_candidates = 48;
  config.refit_every = 3;
  config.gp_starts = 2;
  config.min_l_default = 0;
  return config;
}

TEST(HeadroomTest, DefaultPlanHasUnitHeadroom) {
  const auto& catalog = testing::chain_catalog();
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id;");
  const auto result = headroom(q, optimize(q, catalog, stats).plan, catalog, stats);
  EXPECT_TRUE(result.evaluable);
  EXPECT_DOUBLE_EQ(result.relative, 1.0);
  EXPECT_DOUBLE_EQ(result.absolute, 0.0);
  EXPECT_EQ(result.count, 30u);
}

TEST(HeadroomTest, CorrelatedFixtureHasPinnedHeadroom) {
  const auto& catalog = testing::correlated_catalog();
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(catalog, kCorrelatedQuery);
  const auto default_plan = optimize(q, catalog, stats).plan;
  EXPECT_EQ(default_plan.to_text(catalog),
            "(HashJoinBuildLeft (HashJoinBuildLeft customer (NestedLoopJoin item orders)) store)");
  const auto executed = execute_plan(default_plan, catalog);
  EXPECT_EQ(executed.work_units, 509435u);
  EXPECT_EQ(executed.count, 847u);

  // Brute-force oracle: every valid plan.
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  const PhysicalPlan* best_plan = nullptr;
  const auto plans = enumerate_plans(q, catalog);
  for (const auto& plan : plans) {
    const auto run = execute_plan(plan, catalog);
    ASSERT_EQ(run.count, 847u);
    if (run.work_units < best) {
      best = run.work_units;
      best_plan = &plan;
    }
  }
  EXPECT_EQ(best, 49459u);
  const auto result = headroom(q, *best_plan, catalog, stats);
  EXPECT_DOUBLE_EQ(result.relative, 509435.0 / 49459.0);
  EXPECT_GT(result.relative, 1.0);
}

TEST(HeadroomTest, WitnessCapTimesOut) {
  const auto& catalog = testing::correlated_catalog();
  const auto stats = build_stats(catalog);
  const auto q = testing::sql(catalog, kCorrelatedQuery);
  EvaluatorOptions options;
  options.witness_factor = 1;
  PhysicalPlan worst = enumerate_plans(q, catalog).front();
  std::uint64_t worst_work = 0;
  for (const auto& plan : enumerate_plans(q, catalog)) {
    const auto work = execute_plan(plan, catalog).work_units;
    if (work > worst_work) {
      worst_work = work;
      worst = plan;
    }
  }
  const auto result = headroom(q, worst, catalog, stats, options);
  EXPECT_TRUE(result.witness_timed_out);
  EXPECT_EQ(result.l_witness, 509435u);
  EXPECT_DOUBLE_EQ(result.relative, 0.0);
}

TEST(HeadroomTest, EvaluatorCachesDefaultPlans) {
  const auto& catalog = testing::chain_catalog();
  const auto stats = build_stats(catalog);
  HeadroomEvaluator evaluator(catalog, stats);
  const auto q = testing::sql(catalog, "SELECT COUNT(*) FROM A, B, C WHERE B.a_id = A.id AND C.b_id = B.id;");
  for (const auto& plan : enumerate_plans(q, catalog)) evaluator.evaluate(q, plan);
  EXPECT_EQ(evaluator.default_runs(), 1u);
  EXPECT_EQ(evaluator.cache().size(), 1u);
}

TEST(RunConfigTest, ParseAndValidate) {
  const auto config = parse_run_config(
      R"({"mode": "absolute", "strategy": "random", "iterations": 12, "seed": 4, "checkpoint": "c.ckpt"})", "/tmp/x");
  EXPECT_EQ(config.mode, ObjectiveMode::Absolute);
  EXPECT_EQ(config.strategy, SearchStrategy::Random);
  EXPECT_EQ(config.iterations, 12u);
  EXPECT_EQ(config.checkpoint_path, std::filesystem::path("/tmp/x/c.ckpt"));
  EXPECT_THROW(parse_run_config(R"({"iterationz": 3})"), Error);
  EXPECT_THROW(parse_run_config(R"({"iterations": -3})"), Error);
  EXPECT_THROW(parse_run_config("{"), Error);
  RunConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(validate_run_config(bad), Error);
}

TEST(BoEngineTest, ZeroBudgetKeepsOnlyInitialization) {
  auto config = small_config(1);
  config.iterations = 0;
  const auto archive = run_search(testing::four_catalog(), four_stats(), config);
  ASSERT_FALSE(archive.empty());
  EXPECT_LE(archive.size(), config.initial_samples);
  for (const auto& o : archive) EXPECT_EQ(o.phase, "init");
}

TEST(BoEngineTest, StepsAccountForEveryCandidate) {
  BoEngine engine(testing::four_catalog(), four_stats(), small_config(2));
  engine.initialize();
  EXPECT_EQ(engine.archive().size() + engine.state().discarded.size(), 10u);
  auto best = engine.state().best_objective;
  for (int i = 0; i < 6; ++i) {
    const auto archived = engine.archive().size();
    const auto discarded = engine.state().discarded.size();
    engine.step();
    const auto grown = engine.archive().size() - archived;
    const auto dropped = engine.state().discarded.size() - discarded;
    EXPECT_LE(grown, 3u);
    EXPECT_EQ(grown + dropped, 3u);
    if (best) {
      EXPECT_GE(*engine.state().best_objective, *best);
    }
    best = engine.state().best_objective;
    EXPECT_GE(engine.state().half_width, engine.config().min_half_width);
    EXPECT_LE(engine.state().half_width, engine.config().max_half_width);
  }
  for (std::size_t i = 0; i < engine.archive().size(); ++i) EXPECT_EQ(engine.archive()[i].timestamp, i);
}

TEST(BoEngineTest, ProposalsAreDeterministicAndValid) {
  BoEngine first(testing::four_catalog(), four_stats(), small_config(3));
  BoEngine second(testing::four_catalog(), four_stats(), small_config(3));
  first.initialize();
  second.initialize();
  const auto a = first.propose_batch();
  const auto b = second.propose_batch();
  EXPECT_EQ(a, b);
  EXPECT_LE(a.size(), 3u);
  for (const auto& z : a) {
    const auto pair = decode_latent(z, testing::four_catalog());
    EXPECT_TRUE(validate_query(pair.query, testing::four_catalog()).empty());
    EXPECT_TRUE(validate_plan(pair.plan, pair.query, testing::four_catalog()).empty());
  }
}

TEST(BoEngineTest, ObservationsAreConsistent) {
  const auto config = small_config(4);
  const auto archive = run_search(testing::four_catalog(), four_stats(), config);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& o : archive) {
    EXPECT_TRUE(pairs.emplace(o.sql, o.witness_plan).second) << "duplicate " << o.sql << " " << o.witness_plan;
    const auto pair = decode_latent(latent_from_tokens(o.query_tokens, o.plan_tokens), testing::four_catalog());
    EXPECT_EQ(print_sql(pair.query, testing::four_catalog()), o.sql);
    EXPECT_EQ(pair.plan.to_text(testing::four_catalog()), o.witness_plan);
    EXPECT_DOUBLE_EQ(o.relative, relative_headroom(o.l_default, o.l_witness, o.witness_timed_out));
    EXPECT_EQ(o.seed, config.seed);
  }
}

TEST(BoEngineTest, RandomStrategyRuns) {
  auto config = small_config(5);
  config.strategy = SearchStrategy::Random;
  const auto archive = run_search(testing::four_catalog(), four_stats(), config);
  EXPECT_GT(archive.size(), 10u);
  EXPECT_TRUE(std::any_of(archive.begin(), archive.end(), [](const auto& o) { return o.phase == "random"; }));
}

TEST(BoEngineTest, AbsoluteModeObjective) {
  auto config = small_config(6);
  config.mode = ObjectiveMode::Absolute;
  config.iterations = 2;
  const auto archive = run_search(testing::four_catalog(), four_stats(), config);
  for (const auto& o : archive) EXPECT_DOUBLE_EQ(o.objective, o.absolute);
}

TEST(CheckpointTest, SaveLoadRestoresState) {
  const auto dir = testing::scratch_dir("ckpt_state");
  BoEngine engine(testing::four_catalog(), four_stats(), small_config(7));
  engine.initialize();
  engine.step();
  engine.save_checkpoint(dir / "run.ckpt");
  BoEngine restored(testing::four_catalog(), four_stats(), small_config(7));
  restored.load_checkpoint(dir / "run.ckpt");
  EXPECT_EQ(restored.state(), engine.state());
  EXPECT_EQ(restored.evaluator().cache(), engine.evaluator().cache());
}

TEST(CheckpointTest, TruncatedFileFailsChecksum) {
  const auto dir = testing::scratch_dir("ckpt_truncated");
  BoEngine engine(testing::four_catalog(), four_stats(), small_config(8));
  engine.initialize();
  engine.save_checkpoint(dir / "run.ckpt");
  const auto text = read_file(dir / "run.ckpt");
  write_file(dir / "cut.ckpt", text.substr(0, text.size() - 40));
  BoEngine other(testing::four_catalog(), four_stats(), small_config(8));
  try {
    other.load_checkpoint(dir / "cut.ckpt");
    FAIL() << "expected a checksum error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "checkpoint");
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos) << e.what();
  }
}

TEST(CheckpointTest, MismatchedSettingsAreRejected) {
  const auto dir = testing::scratch_dir("ckpt_mismatch");
  BoEngine engine(testing::four_catalog(), four_stats(), small_config(9));
  engine.initialize();
  engine.save_checkpoint(dir / "run.ckpt");
  auto changed = small_config(9);
  changed.batch_size = 4;
  BoEngine other(testing::four_catalog(), four_stats(), changed);
  EXPECT_THROW(other.load_checkpoint(dir / "run.ckpt"), Error);
  auto longer = small_config(9);
  longer.iterations = 50;
  BoEngine extended(testing::four_catalog(), four_stats(), longer);
  EXPECT_NO_THROW(extended.load_checkpoint(dir / "run.ckpt"));
}

TEST(CheckpointTest, ResumeThenStepEqualsStep) {
  const auto dir = testing::scratch_dir("ckpt_step");
  BoEngine engine(testing::four_catalog(), four_stats(), small_config(10));
  engine.initialize();
  engine.step();
  engine.save_checkpoint(dir / "run.ckpt");
  engine.step();

  BoEngine resumed(testing::four_catalog(), four_stats(), small_config(10));
  resumed.load_checkpoint(dir / "run.ckpt");
  resumed.step();
  EXPECT_EQ(resumed.state(), engine.state());
}

TEST(CheckpointTest, InterruptedRunMatchesUninterrupted) {
  const auto dir = testing::scratch_dir("ckpt_resume");
  auto config = small_config(11);
  config.iterations = 7;
  const auto uninterrupted = run_search(testing::four_catalog(), four_stats(), config);

  auto partial = config;
  partial.iterations = 4;
  partial.checkpoint_path = dir / "run.ckpt";
  run_search(testing::four_catalog(), four_stats(), partial);
  BoEngine resumed(testing::four_catalog(), four_stats(), config);
  resumed.load_checkpoint(dir / "run.ckpt");
  resumed.run();
  EXPECT_EQ(archive_to_jsonl(resumed.archive()), archive_to_jsonl(uninterrupted));
}

}  // namespace
}  // namespace headroom
