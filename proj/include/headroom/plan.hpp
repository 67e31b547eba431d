#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "headroom/catalog.hpp"
#include "headroom/query.hpp"

namespace headroom {

/** Join operators, in codec operator-index order. */
enum class JoinOp : std::uint8_t { HashJoinBuildLeft, HashJoinBuildRight, NestedLoopJoin };

inline constexpr std::array<JoinOp, 3> kJoinOps = {JoinOp::HashJoinBuildLeft, JoinOp::HashJoinBuildRight,
                                                   JoinOp::NestedLoopJoin};

std::string_view to_string(JoinOp op);

struct PlanNode {
  bool is_scan = true;
  std::uint32_t table = 0;          // scans
  std::vector<Predicate> filters;   // scans: every query predicate on `table`
  JoinOp op = JoinOp::HashJoinBuildLeft;
  std::uint32_t left = 0;           // joins: child node indices
  std::uint32_t right = 0;
  std::vector<std::uint32_t> edges; // joins: query edges connecting the two subtrees
  std::uint64_t tables = 0;         // catalog tables under this node

  bool operator==(const PlanNode& other) const = default;
};

/**
 * Binary join tree stored in post-order (root last). Children are kept in canonical order: the left subtree holds
 * the smaller minimum table index. Because construction always appends in post-order, `==` is structural equality.
 */
class PhysicalPlan {
 public:
  static PhysicalPlan scan(std::uint32_t table, std::vector<Predicate> filters);

  /** Joins two plans; swaps children (mirroring the build side) when needed to keep canonical order. */
  static PhysicalPlan join(JoinOp op, const PhysicalPlan& left, const PhysicalPlan& right,
                           std::vector<std::uint32_t> edges);

  const std::vector<PlanNode>& nodes() const { return nodes_; }
  const PlanNode& root() const { return nodes_.back(); }
  std::uint32_t root_index() const { return static_cast<std::uint32_t>(nodes_.size() - 1); }
  std::uint64_t tables() const { return root().tables; }
  std::size_t join_count() const { return nodes_.size() / 2; }

  /** Subtree rooted at `node` as a standalone plan. */
  PhysicalPlan subtree(std::uint32_t node) const;

  /** S-expression text, e.g. `(HashJoinBuildLeft (NestedLoopJoin A B) C)`. */
  std::string to_text(const Catalog& catalog) const;

  bool operator==(const PhysicalPlan& other) const = default;

 private:
  std::vector<PlanNode> nodes_;
};

/** Query edges joining a table in `left` to a table in `right`. */
std::vector<std::uint32_t> connecting_edges(const ConjunctiveQuery& query, std::uint64_t left, std::uint64_t right,
                                            const Catalog& catalog);

/** Predicates of `query` on `table`, in canonical order. */
std::vector<Predicate> filters_for(const ConjunctiveQuery& query, std::uint32_t table);

PhysicalPlan scan_for(const ConjunctiveQuery& query, std::uint32_t table);

/** Joins two subplans of `query`, deriving the join condition from the query's edges. */
PhysicalPlan join_for(const ConjunctiveQuery& query, JoinOp op, const PhysicalPlan& left, const PhysicalPlan& right,
                      const Catalog& catalog);

/** Empty iff `plan` is a valid plan of `query`. */
std::vector<std::string> validate_plan(const PhysicalPlan& plan, const ConjunctiveQuery& query,
                                       const Catalog& catalog);

/** Parses plan text written by `to_text`; children may appear in either order. */
PhysicalPlan parse_plan_text(std::string_view text, const ConjunctiveQuery& query, const Catalog& catalog);

}  // namespace headroom
