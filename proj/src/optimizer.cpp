#include "headroom/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>

#include "headroom/error.hpp"

namespace headroom {

CardinalityEstimator::CardinalityEstimator(const ConjunctiveQuery& query, const Catalog& catalog,
                                           const Statistics& stats)
    : query_(query), catalog_(catalog), stats_(stats) {
  if (stats.table_count() != catalog.table_count()) throw Error("query", "statistics missing for catalog");
}

double CardinalityEstimator::scan_rows(std::uint32_t table) const {
  const auto rows = static_cast<double>(stats_.row_count(table));
  if (rows == 0.0) return 0.0;
  double estimate = rows;
  for (const auto& predicate : query_.predicates) {
    if (predicate.column.table != table) continue;
    estimate *= stats_.column(predicate.column).selectivity(predicate.op, predicate.literal);
  }
  return std::max(1.0, estimate);
}

double CardinalityEstimator::rows(std::uint64_t mask) const {
  // Fixed multiplication order (tables ascending, then edges ascending) makes this a function of the set alone.
  double estimate = 1.0;
  for (auto remaining = mask; remaining; remaining &= remaining - 1) {
    const auto t = static_cast<std::uint32_t>(std::countr_zero(remaining));
    const auto base = scan_rows(t);
    if (base == 0.0) return 0.0;
    estimate *= base;
  }
  for (const auto e : query_.joins) {
    const auto& edge = catalog_.edge(e);
    if (!(mask & table_bit(edge.left.table)) || !(mask & table_bit(edge.right.table))) continue;
    const auto ndv = std::max(stats_.column(edge.left).distinct_count, stats_.column(edge.right).distinct_count);
    estimate /= static_cast<double>(std::max<std::uint64_t>(1, ndv));
  }
  return std::max(1.0, estimate);
}

double join_cost(JoinOp op, double left_rows, double right_rows, double output_rows) {
  if (op == JoinOp::NestedLoopJoin) return left_rows * right_rows + output_rows;
  return left_rows + right_rows + output_rows;
}

CostedPlan cost_plan(const PhysicalPlan& plan, const ConjunctiveQuery& query, const Catalog& catalog,
                     const Statistics& stats) {
  const CardinalityEstimator estimator(query, catalog, stats);
  std::vector<double> cost(plan.nodes().size());
  std::vector<double> rows(plan.nodes().size());
  for (std::size_t i = 0; i < plan.nodes().size(); ++i) {
    const auto& node = plan.nodes()[i];
    if (node.is_scan) {
      cost[i] = static_cast<double>(stats.row_count(node.table));
      rows[i] = estimator.scan_rows(node.table);
      continue;
    }
    rows[i] = estimator.rows(node.tables);
    cost[i] = cost[node.left] + cost[node.right] + join_cost(node.op, rows[node.left], rows[node.right], rows[i]);
  }
  return {plan, cost.back(), rows.back()};
}

CostedPlan optimize(const ConjunctiveQuery& query, const Catalog& catalog, const Statistics& stats) {
  require_valid(query, catalog);
  const auto n = query.tables.size();
  if (n > kMaxOptimizerTables) {
    throw Error("query", "query joins " + std::to_string(n) + " tables; the optimizer supports at most " +
                             std::to_string(kMaxOptimizerTables));
  }
  const CardinalityEstimator estimator(query, catalog, stats);

  // Local bit i stands for query.tables[i]; ascending local order matches ascending catalog order.
  const auto to_catalog = [&](std::uint32_t local) {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (local >> i & 1U) mask |= table_bit(query.tables[i]);
    }
    return mask;
  };
  std::vector<std::uint32_t> adjacency(n, 0);
  for (const auto e : query.joins) {
    const auto& edge = catalog.edge(e);
    const auto l = static_cast<std::size_t>(
        std::find(query.tables.begin(), query.tables.end(), edge.left.table) - query.tables.begin());
    const auto r = static_cast<std::size_t>(
        std::find(query.tables.begin(), query.tables.end(), edge.right.table) - query.tables.begin());
    adjacency[l] |= 1U << r;
    adjacency[r] |= 1U << l;
  }
  const auto connected = [&](std::uint32_t subset) {
    std::uint32_t reached = subset & (~subset + 1);
    std::uint32_t frontier = reached;
    while (frontier) {
      std::uint32_t next = 0;
      for (auto f = frontier; f; f &= f - 1) next |= adjacency[std::countr_zero(f)];
      next &= subset & ~reached;
      reached |= next;
      frontier = next;
    }
    return reached == subset;
  };
  const auto neighbours = [&](std::uint32_t subset) {
    std::uint32_t out = 0;
    for (auto s = subset; s; s &= s - 1) out |= adjacency[std::countr_zero(s)];
    return out;
  };

  struct Entry {
    double cost = 0.0;
    double rows = 0.0;
    std::optional<PhysicalPlan> plan;
    std::string text;
  };
  const std::uint32_t full = n == 32 ? ~0U : (1U << n) - 1;
  std::vector<Entry> best(static_cast<std::size_t>(full) + 1);

  for (std::size_t i = 0; i < n; ++i) {
    auto& entry = best[1U << i];
    entry.plan = scan_for(query, query.tables[i]);
    entry.cost = static_cast<double>(stats.row_count(query.tables[i]));
    entry.rows = estimator.scan_rows(query.tables[i]);
    entry.text = entry.plan->to_text(catalog);
  }

  for (std::uint32_t subset = 1; subset <= full; ++subset) {
    if (std::popcount(subset) < 2 || !connected(subset)) continue;
    auto& entry = best[subset];
    entry.rows = estimator.rows(to_catalog(subset));
    const auto lowest = subset & (~subset + 1);
    // Left side always holds the lowest table, which is the canonical child order.
    for (std::uint32_t left = (subset - 1) & subset; left; left = (left - 1) & subset) {
      if (!(left & lowest)) continue;
      const auto right = subset & ~left;
      if (!best[left].plan || !best[right].plan) continue;
      if (!(neighbours(left) & right)) continue;
      for (const auto op : kJoinOps) {
        const auto cost = best[left].cost + best[right].cost + join_cost(op, best[left].rows, best[right].rows, entry.rows);
        if (entry.plan && cost > entry.cost) continue;
        auto plan = join_for(query, op, *best[left].plan, *best[right].plan, catalog);
        auto text = plan.to_text(catalog);
        if (entry.plan && cost == entry.cost && text >= entry.text) continue;
        entry.cost = cost;
        entry.plan = std::move(plan);
        entry.text = std::move(text);
      }
    }
  }

  const auto& result = best[full];
  if (!result.plan) throw Error("query", "no plan found for a connected query");
  return {*result.plan, result.cost, result.rows};
}

}  // namespace headroom
