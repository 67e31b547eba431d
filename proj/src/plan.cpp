#include "headroom/plan.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <functional>

#include "headroom/error.hpp"

namespace headroom {

namespace {

std::uint32_t min_table(std::uint64_t mask) {
  return static_cast<std::uint32_t>(std::countr_zero(mask));
}

void append_shifted(std::vector<PlanNode>& out, const std::vector<PlanNode>& nodes) {
  const auto offset = static_cast<std::uint32_t>(out.size());
  for (auto node : nodes) {
    if (!node.is_scan) {
      node.left += offset;
      node.right += offset;
    }
    out.push_back(std::move(node));
  }
}

}  // namespace

std::string_view to_string(JoinOp op) {
  switch (op) {
    case JoinOp::HashJoinBuildLeft:
      return "HashJoinBuildLeft";
    case JoinOp::HashJoinBuildRight:
      return "HashJoinBuildRight";
    case JoinOp::NestedLoopJoin:
      return "NestedLoopJoin";
  }
  return "?";
}

PhysicalPlan PhysicalPlan::scan(std::uint32_t table, std::vector<Predicate> filters) {
  PhysicalPlan plan;
  PlanNode node;
  node.is_scan = true;
  node.table = table;
  node.filters = std::move(filters);
  node.tables = table_bit(table);
  plan.nodes_.push_back(std::move(node));
  return plan;
}

PhysicalPlan PhysicalPlan::join(JoinOp op, const PhysicalPlan& left, const PhysicalPlan& right,
                                std::vector<std::uint32_t> edges) {
  if (left.tables() & right.tables()) throw Error("argument", "joined subplans overlap");
  if (min_table(right.tables()) < min_table(left.tables())) {
    if (op == JoinOp::HashJoinBuildLeft) {
      op = JoinOp::HashJoinBuildRight;
    } else if (op == JoinOp::HashJoinBuildRight) {
      op = JoinOp::HashJoinBuildLeft;
    }
    return join(op, right, left, std::move(edges));
  }
  PhysicalPlan plan;
  plan.nodes_.reserve(left.nodes_.size() + right.nodes_.size() + 1);
  append_shifted(plan.nodes_, left.nodes_);
  const auto left_root = static_cast<std::uint32_t>(plan.nodes_.size() - 1);
  append_shifted(plan.nodes_, right.nodes_);
  const auto right_root = static_cast<std::uint32_t>(plan.nodes_.size() - 1);

  std::sort(edges.begin(), edges.end());
  PlanNode node;
  node.is_scan = false;
  node.op = op;
  node.left = left_root;
  node.right = right_root;
  node.edges = std::move(edges);
  node.tables = left.tables() | right.tables();
  plan.nodes_.push_back(std::move(node));
  return plan;
}

PhysicalPlan PhysicalPlan::subtree(std::uint32_t index) const {
  const auto& node = nodes_.at(index);
  if (node.is_scan) return scan(node.table, node.filters);
  return join(node.op, subtree(node.left), subtree(node.right), node.edges);
}

std::string PhysicalPlan::to_text(const Catalog& catalog) const {
  std::function<std::string(std::uint32_t)> render = [&](std::uint32_t index) -> std::string {
    const auto& node = nodes_[index];
    if (node.is_scan) return catalog.table(node.table).name;
    return "(" + std::string(to_string(node.op)) + " " + render(node.left) + " " + render(node.right) + ")";
  };
  return render(root_index());
}

std::vector<std::uint32_t> connecting_edges(const ConjunctiveQuery& query, std::uint64_t left, std::uint64_t right,
                                            const Catalog& catalog) {
  std::vector<std::uint32_t> result;
  for (const auto e : query.joins) {
    const auto l = table_bit(catalog.edge(e).left.table);
    const auto r = table_bit(catalog.edge(e).right.table);
    if (((left & l) && (right & r)) || ((left & r) && (right & l))) result.push_back(e);
  }
  return result;
}

std::vector<Predicate> filters_for(const ConjunctiveQuery& query, std::uint32_t table) {
  std::vector<Predicate> result;
  for (const auto& predicate : query.predicates) {
    if (predicate.column.table == table) result.push_back(predicate);
  }
  std::sort(result.begin(), result.end());
  return result;
}

PhysicalPlan scan_for(const ConjunctiveQuery& query, std::uint32_t table) {
  return PhysicalPlan::scan(table, filters_for(query, table));
}

PhysicalPlan join_for(const ConjunctiveQuery& query, JoinOp op, const PhysicalPlan& left, const PhysicalPlan& right,
                      const Catalog& catalog) {
  return PhysicalPlan::join(op, left, right, connecting_edges(query, left.tables(), right.tables(), catalog));
}

std::vector<std::string> validate_plan(const PhysicalPlan& plan, const ConjunctiveQuery& query,
                                       const Catalog& catalog) {
  std::vector<std::string> violations;
  if (plan.nodes().empty()) return {"plan is empty"};

  std::vector<std::uint32_t> leaves;
  for (std::uint32_t i = 0; i < plan.nodes().size(); ++i) {
    const auto& node = plan.nodes()[i];
    if (node.is_scan) {
      leaves.push_back(node.table);
      if (node.filters != filters_for(query, node.table)) {
        violations.push_back("scan of " + catalog.table(node.table).name + " does not carry exactly its predicates");
      }
      continue;
    }
    if (node.left >= i || node.right >= i) {
      violations.emplace_back("join node children are not in post-order");
      continue;
    }
    const auto lt = plan.nodes()[node.left].tables;
    const auto rt = plan.nodes()[node.right].tables;
    if (lt & rt) violations.emplace_back("join children overlap");
    if (node.tables != (lt | rt)) violations.emplace_back("join node table set mismatch");
    if (min_table(rt) < min_table(lt)) violations.emplace_back("join children not in canonical order");
    const auto expected = connecting_edges(query, lt, rt, catalog);
    if (expected.empty()) violations.emplace_back("join node is a cross product");
    if (node.edges != expected) violations.emplace_back("join node edges differ from the connecting query edges");
  }

  auto sorted = leaves;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    violations.emplace_back("a table is scanned more than once");
  }
  if (sorted != query.tables) violations.emplace_back("plan leaves differ from the query tables");
  if (plan.nodes().size() != 2 * leaves.size() - 1) violations.emplace_back("plan is not a single binary tree");
  return violations;
}

PhysicalPlan parse_plan_text(std::string_view text, const ConjunctiveQuery& query, const Catalog& catalog) {
  std::size_t pos = 0;
  const auto skip_space = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  const auto word = [&] {
    const auto start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
    if (start == pos) throw SyntaxError(start, "expected a name");
    return std::string(text.substr(start, pos - start));
  };

  std::function<PhysicalPlan()> parse = [&]() -> PhysicalPlan {
    skip_space();
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      skip_space();
      const auto op_start = pos;
      const auto op_name = word();
      const auto it = std::find_if(kJoinOps.begin(), kJoinOps.end(), [&](JoinOp op) { return to_string(op) == op_name; });
      if (it == kJoinOps.end()) throw SyntaxError(op_start, "unknown join operator '" + op_name + "'");
      auto left = parse();
      auto right = parse();
      skip_space();
      if (pos >= text.size() || text[pos] != ')') throw SyntaxError(pos, "expected ')'");
      ++pos;
      auto edges = connecting_edges(query, left.tables(), right.tables(), catalog);
      if (edges.empty()) throw Error("query", "plan joins subtrees with no connecting join edge");
      return PhysicalPlan::join(*it, left, right, std::move(edges));
    }
    const auto name_start = pos;
    const auto name = word();
    const auto table = catalog.table_index(name);
    if (!table) throw SyntaxError(name_start, "unknown table '" + name + "'");
    return scan_for(query, *table);
  };

  auto plan = parse();
  skip_space();
  if (pos != text.size()) throw SyntaxError(pos, "trailing text after plan");
  const auto violations = validate_plan(plan, query, catalog);
  if (!violations.empty()) throw Error("query", "plan is not valid for the query: " + violations.front());
  return plan;
}

}  // namespace headroom
