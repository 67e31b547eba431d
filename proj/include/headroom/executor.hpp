#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>

#include "headroom/catalog.hpp"
#include "headroom/plan.hpp"
#include "headroom/query.hpp"

namespace headroom {

enum class ExecMode : std::uint8_t { WorkUnits, WallClock };

struct ExecOptions {
  ExecMode mode = ExecMode::WorkUnits;
  /** Exceeding this many work units stops execution with a timeout result carrying the cap. */
  std::uint64_t max_work_units = std::numeric_limits<std::uint64_t>::max();
  /** Intermediate results larger than this are treated like a work-unit timeout. */
  std::uint64_t max_materialized_rows = 50'000'000;
};

/**
 * Work units: a scan costs its table's row count; a hash join |build| + |probe| + |output|; a nested-loop join
 * |outer| * |inner| + |output|. On timeout `work_units` holds the cap and `count` is 0.
 */
struct ExecutionResult {
  std::uint64_t count = 0;
  std::uint64_t work_units = 0;
  bool timed_out = false;
  std::optional<std::chrono::nanoseconds> wall_clock;
};

ExecutionResult execute_plan(const PhysicalPlan& plan, const Catalog& catalog, const ExecOptions& options = {});

inline constexpr std::uint64_t kDefaultOracleSteps = 2'000'000'000;

/**
 * Reference COUNT(*) by nested-loop enumeration of the filtered tables in a connected order, testing every join
 * condition as soon as both sides are bound. Refuses (Error "execution") after `max_steps` candidate rows.
 */
std::uint64_t naive_count_oracle(const ConjunctiveQuery& query, const Catalog& catalog,
                                 std::uint64_t max_steps = kDefaultOracleSteps);

}  // namespace headroom
