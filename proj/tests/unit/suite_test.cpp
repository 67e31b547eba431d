#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "grammar_checker.hpp"
#include "headroom/error.hpp"
#include "headroom/latent.hpp"
#include "headroom/rng.hpp"
#include "headroom/suite.hpp"

namespace headroom {
namespace {

Observation fake(const std::string& sql, double relative, std::uint64_t l_default = 1000) {
  Observation o;
  o.sql = sql;
  o.witness_plan = "p" + std::to_string(relative);
  o.l_default = l_default;
  o.l_witness = static_cast<std::uint64_t>(std::llround(static_cast<double>(l_default) / relative));
  o.relative = relative;
  o.absolute = static_cast<double>(o.l_default) - static_cast<double>(o.l_witness);
  o.objective = relative;
  return o;
}

/** Observations over real decoded queries, so exports can be re-parsed. */
std::vector<Observation> decoded_archive(const Catalog& catalog, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Observation> archive;
  for (int i = 0; i < n; ++i) {
    LatentVector z;
    for (auto& v : z) v = rng.uniform(-kLatentBound, kLatentBound);
    const auto pair = decode_latent(z, catalog);
    auto o = fake(print_sql(pair.query, catalog), 1.0 + rng.uniform() * 30.0, 1000 + rng.below(100000));
    o.witness_plan = pair.plan.to_text(catalog);
    o.query_tokens = pair.query_tokens;
    o.plan_tokens = pair.plan_tokens;
    o.timestamp = static_cast<std::uint64_t>(i);
    archive.push_back(o);
  }
  return archive;
}

TEST(StatisticsFunctionsTest, GeometricMeanAndMedian) {
  EXPECT_NEAR(geometric_mean({2, 8}), 4.0, 1e-12);
  EXPECT_NEAR(geometric_mean({3.5}), 3.5, 1e-12);
  EXPECT_NEAR(geometric_mean({1.5, 20, 80}), std::cbrt(2400.0), 1e-12);
  EXPECT_NEAR(geometric_mean({1.5, 20, 80}), 13.3887, 5e-5);
  EXPECT_DOUBLE_EQ(median({80, 1.5, 20}), 20.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_DOUBLE_EQ(median({6.25}), 6.25);
  EXPECT_THROW(geometric_mean({}), Error);
  EXPECT_THROW(geometric_mean({1.0, 0.0}), Error);
}

TEST(StatisticsFunctionsTest, CdfPoints) {
  const auto points = cdf_points({3, 1, 2, 2});
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(points[0], (std::pair<double, double>{1, 0.25}));
  EXPECT_EQ(points[3], (std::pair<double, double>{3, 1.0}));
}

// Property: geometric mean is scale-equivariant and bounded by the arithmetic mean.
TEST(StatisticsFunctionsProperty, GeometricMeanLaws) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(1 + rng.below(20));
    for (auto& v : values) v = std::exp(rng.uniform(-5, 5));
    const double c = std::exp(rng.uniform(-3, 3));
    std::vector<double> scaled = values;
    for (auto& v : scaled) v *= c;
    const double g = geometric_mean(values);
    EXPECT_NEAR(geometric_mean(scaled), c * g, 1e-9 * c * g);
    double mean = 0;
    for (double v : values) mean += v / static_cast<double>(values.size());
    EXPECT_LE(g, mean * (1 + 1e-12));
  }
}

TEST(SelectTest, FewerThanKWarns) {
  const auto suite = select_top_k({fake("SELECT COUNT(*) FROM A;", 2.0)}, {5, ObjectiveMode::Relative, 0});
  ASSERT_EQ(suite.entries.size(), 1u);
  EXPECT_EQ(suite.entries[0].name, "q1");
  EXPECT_EQ(suite.warnings.size(), 1u);
}

TEST(SelectTest, KeepsBestWitnessPerQuery) {
  const auto suite = select_top_k({fake("SELECT COUNT(*) FROM A;", 3.0), fake("SELECT COUNT(*) FROM A;", 7.0)},
                                  {5, ObjectiveMode::Relative, 0});
  ASSERT_EQ(suite.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(suite.entries[0].relative, 7.0);
}

TEST(SelectTest, SortedAndFiltered) {
  std::vector<Observation> archive;
  for (int i = 0; i < 30; ++i) archive.push_back(fake("Q" + std::to_string(i), 1.0 + (i * 37 % 30), 500 + i * 100));
  auto timed_out = fake("QT", 99.0);
  timed_out.witness_timed_out = true;
  archive.push_back(timed_out);
  const auto suite = select_top_k(archive, {10, ObjectiveMode::Relative, 1000});
  ASSERT_EQ(suite.entries.size(), 10u);
  for (std::size_t i = 1; i < suite.entries.size(); ++i) {
    EXPECT_GE(suite.entries[i - 1].relative, suite.entries[i].relative);
  }
  for (const auto& e : suite.entries) {
    EXPECT_GE(e.l_default, 1000u);
    EXPECT_NE(e.sql, "QT");
  }
  const auto by_absolute = select_top_k(archive, {10, ObjectiveMode::Absolute, 0});
  for (std::size_t i = 1; i < by_absolute.entries.size(); ++i) {
    EXPECT_GE(by_absolute.entries[i - 1].absolute, by_absolute.entries[i].absolute);
  }
  EXPECT_THROW(select_top_k(archive, {0, ObjectiveMode::Relative, 0}), Error);
}

TEST(ExportTest, RoundTripAndDeterminism) {
  const auto& catalog = testing::four_catalog();
  const auto suite = select_top_k(decoded_archive(catalog, 60, 5), {20, ObjectiveMode::Relative, 0});
  ASSERT_FALSE(suite.entries.empty());
  const ExportInfo info{catalog.identity(), "test"};
  const auto first = testing::scratch_dir("export_a");
  const auto second = testing::scratch_dir("export_b");
  export_benchmark(suite, info, first);
  export_benchmark(suite, info, second);
  for (const char* file : {"queries.sql", "witness_plans.jsonl", "headroom.csv", "manifest.json"}) {
    EXPECT_EQ(read_file(first / file), read_file(second / file)) << file;
  }

  const auto csv = read_file(first / "headroom.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "name,l_default,l_witness,relative,absolute");

  const auto named = parse_sql_script(read_file(first / "queries.sql"), catalog);
  ASSERT_EQ(named.size(), suite.entries.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    EXPECT_EQ(named[i].name, suite.entries[i].name);
    EXPECT_EQ(print_sql(named[i].query, catalog), suite.entries[i].sql);
    EXPECT_EQ(testing::grammar_violation(suite.entries[i].sql), "");
    EXPECT_EQ(parse_plan_text(suite.entries[i].witness_plan, named[i].query, catalog).to_text(catalog),
              suite.entries[i].witness_plan);
  }

  const auto loaded = load_benchmark(first);
  ASSERT_EQ(loaded.entries.size(), suite.entries.size());
  for (std::size_t i = 0; i < loaded.entries.size(); ++i) {
    EXPECT_EQ(loaded.entries[i].name, suite.entries[i].name);
    EXPECT_EQ(loaded.entries[i].l_default, suite.entries[i].l_default);
    EXPECT_DOUBLE_EQ(loaded.entries[i].relative, suite.entries[i].relative);
  }
}

// Property: report medians equal a brute-force recomputation from the archive records.
TEST(ReportProperty, MediansMatchArchive) {
  const auto& catalog = testing::four_catalog();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto archive = decoded_archive(catalog, 40, seed);
    const auto suite = select_top_k(archive, {15, ObjectiveMode::Relative, 0});
    const auto report = summarize(suite);

    std::map<std::string, const Observation*> best;
    for (const auto& o : archive) {
      auto& slot = best[o.sql];
      if (!slot || o.relative > slot->relative) slot = &o;
    }
    std::vector<const Observation*> ranked;
    for (const auto& [sql, o] : best) ranked.push_back(o);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Observation* a, const Observation* b) { return a->relative > b->relative; });
    ranked.resize(std::min<std::size_t>(15, ranked.size()));
    std::vector<double> relative;
    std::vector<double> absolute;
    for (const auto* o : ranked) {
      relative.push_back(o->relative);
      absolute.push_back(o->absolute);
    }
    std::sort(relative.begin(), relative.end());
    std::sort(absolute.begin(), absolute.end());
    const auto mid = [](const std::vector<double>& v) {
      return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    EXPECT_DOUBLE_EQ(report.median_relative, mid(relative));
    EXPECT_DOUBLE_EQ(report.median_absolute, mid(absolute));
    EXPECT_EQ(report.size, ranked.size());
  }
}

TEST(ReportTest, SingleEntrySuite) {
  BenchmarkSuite suite;
  suite.entries.push_back({"q1", "SELECT COUNT(*) FROM A;", "A", {}, {}, 100, 8, 12.5, 92});
  const auto report = summarize(suite);
  EXPECT_DOUBLE_EQ(report.median_relative, 12.5);
  EXPECT_NEAR(report.geometric_mean_relative, 12.5, 1e-12);
  EXPECT_NE(report_to_json(report).find("\"median_relative\""), std::string::npos);
  EXPECT_EQ(cdf_to_csv(report.relative_cdf).substr(0, 6), "value,");
  const auto svg = cdf_to_svg(report.relative_cdf, report.median_relative, "relative", true);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_THROW(summarize(BenchmarkSuite{}), Error);
}

}  // namespace
}  // namespace headroom
