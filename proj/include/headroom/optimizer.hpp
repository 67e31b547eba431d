#pragma once

#include <cstdint>
#include <vector>

#include "headroom/catalog.hpp"
#include "headroom/plan.hpp"
#include "headroom/query.hpp"
#include "headroom/statistics.hpp"

namespace headroom {

struct CostedPlan {
  PhysicalPlan plan;
  double estimated_cost = 0.0;
  double estimated_rows = 0.0;
};

/**
 * Textbook estimator: histogram selectivities multiplied under the independence assumption, equijoins scaled by
 * 1 / max(ndv(left key), ndv(right key)) per edge. Estimates are floored at one row unless a base table is empty.
 */
class CardinalityEstimator {
 public:
  CardinalityEstimator(const ConjunctiveQuery& query, const Catalog& catalog, const Statistics& stats);

  /** Estimated output of scanning `table` with its query predicates. */
  double scan_rows(std::uint32_t table) const;

  /** Estimated rows of joining the catalog tables in `mask` (a subset of the query) with all query edges inside. */
  double rows(std::uint64_t mask) const;

 private:
  const ConjunctiveQuery& query_;
  const Catalog& catalog_;
  const Statistics& stats_;
};

/** Applies the executor's work-unit formulas to estimated cardinalities. */
CostedPlan cost_plan(const PhysicalPlan& plan, const ConjunctiveQuery& query, const Catalog& catalog,
                     const Statistics& stats);

/** Largest query the exact dynamic program accepts. */
inline constexpr std::size_t kMaxOptimizerTables = 20;

/**
 * Exact dynamic programming over connected subsets (bushy trees, no cross products), picking the cheapest operator
 * per join. Ties go to the plan whose text sorts first.
 */
CostedPlan optimize(const ConjunctiveQuery& query, const Catalog& catalog, const Statistics& stats);

double join_cost(JoinOp op, double left_rows, double right_rows, double output_rows);

}  // namespace headroom
