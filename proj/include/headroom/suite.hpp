#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "headroom/archive.hpp"
#include "headroom/catalog.hpp"

namespace headroom {

struct SuiteEntry {
  std::string name;  // q1..qN
  std::string sql;
  std::string witness_plan;
  PlanTokens plan_tokens{};
  QueryTokens query_tokens{};
  std::uint64_t l_default = 0;
  std::uint64_t l_witness = 0;
  double relative = 0.0;
  double absolute = 0.0;

  bool operator==(const SuiteEntry& other) const = default;
};

struct BenchmarkSuite {
  std::vector<SuiteEntry> entries;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultSuiteSize = 122;

struct SelectOptions {
  std::size_t k = kDefaultSuiteSize;
  ObjectiveMode rank_mode = ObjectiveMode::Relative;
  /** Observations whose default plan is cheaper than this are skipped. */
  std::uint64_t min_l_default = 0;
};

/**
 * Keeps each query's best witness under `rank_mode` (witness timeouts are never selected), sorts by that headroom
 * descending (ties by SQL text), takes the first k and names them q1..qk. Fewer than k adds a warning.
 */
BenchmarkSuite select_top_k(const std::vector<Observation>& archive, const SelectOptions& options);

struct ExportInfo {
  std::string catalog_identity;
  std::string engine_version;
};

/** Writes queries.sql, witness_plans.jsonl, headroom.csv and manifest.json into `out_dir`. */
void export_benchmark(const BenchmarkSuite& suite, const ExportInfo& info, const std::filesystem::path& out_dir);

/** Reads back headroom.csv and witness_plans.jsonl of an exported suite (SQL text comes from queries.sql). */
BenchmarkSuite load_benchmark(const std::filesystem::path& dir);

std::string suite_queries_sql(const BenchmarkSuite& suite);
std::string suite_headroom_csv(const BenchmarkSuite& suite);

/** exp(mean(log v)). Throws Error("argument") on empty input or a nonpositive value. */
double geometric_mean(const std::vector<double>& values);

/** Standard median: middle order statistic, or the mean of the two middle ones. */
double median(std::vector<double> values);

/** (value, rank / N) for the sorted values. */
std::vector<std::pair<double, double>> cdf_points(std::vector<double> values);

struct HeadroomReport {
  std::size_t size = 0;
  std::vector<double> relative;  // sorted ascending
  std::vector<double> absolute;  // sorted ascending
  double median_relative = 0.0;
  double median_absolute = 0.0;
  double geometric_mean_relative = 0.0;
  double min_relative = 0.0;
  double max_relative = 0.0;
  double min_absolute = 0.0;
  double max_absolute = 0.0;
  std::vector<std::pair<double, double>> relative_cdf;
  std::vector<std::pair<double, double>> absolute_cdf;
};

/** Throws Error("argument") for an empty suite or a nonpositive relative headroom. */
HeadroomReport summarize(const BenchmarkSuite& suite);

std::string report_to_json(const HeadroomReport& report);
std::string cdf_to_csv(const std::vector<std::pair<double, double>>& points);
/** Step plot of one CDF with the median marked. */
std::string cdf_to_svg(const std::vector<std::pair<double, double>>& points, double median, const std::string& label,
                       bool log_x);

}  // namespace headroom
