#include "headroom/query.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "headroom/error.hpp"

namespace headroom {

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq:
      return "=";
    case CmpOp::Lt:
      return "<";
    case CmpOp::Gt:
      return ">";
    case CmpOp::Le:
      return "<=";
    case CmpOp::Ge:
      return ">=";
    case CmpOp::Ne:
      return "<>";
  }
  return "?";
}

bool Predicate::operator<(const Predicate& other) const {
  if (column != other.column) return column < other.column;
  if (op != other.op) return op < other.op;
  return literal < other.literal;
}

std::uint64_t ConjunctiveQuery::table_mask() const {
  std::uint64_t mask = 0;
  for (const auto t : tables) mask |= table_bit(t);
  return mask;
}

void ConjunctiveQuery::canonicalize() {
  std::sort(tables.begin(), tables.end());
  tables.erase(std::unique(tables.begin(), tables.end()), tables.end());
  std::sort(joins.begin(), joins.end());
  joins.erase(std::unique(joins.begin(), joins.end()), joins.end());
  std::sort(predicates.begin(), predicates.end());
  predicates.erase(std::unique(predicates.begin(), predicates.end()), predicates.end());
}

std::vector<std::uint32_t> implied_edges(std::uint64_t table_mask, const Catalog& catalog) {
  std::vector<std::uint32_t> result;
  for (std::uint32_t e = 0; e < catalog.edges().size(); ++e) {
    const auto& edge = catalog.edge(e);
    if ((table_mask >> edge.left.table & 1U) && (table_mask >> edge.right.table & 1U)) result.push_back(e);
  }
  return result;
}

bool is_connected(std::uint64_t table_mask, const std::vector<std::uint32_t>& edges, const Catalog& catalog) {
  if (table_mask == 0) return false;
  std::uint64_t reached = table_mask & (~table_mask + 1);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto e : edges) {
      const auto& edge = catalog.edge(e);
      const auto l = table_bit(edge.left.table);
      const auto r = table_bit(edge.right.table);
      if (!(table_mask & l) || !(table_mask & r)) continue;
      if (((reached & l) != 0) != ((reached & r) != 0)) {
        reached |= l | r;
        grew = true;
      }
    }
  }
  return reached == table_mask;
}

std::vector<std::string> validate_query(const ConjunctiveQuery& query, const Catalog& catalog) {
  std::vector<std::string> violations;
  if (query.tables.empty()) violations.emplace_back("query selects no tables");

  std::set<std::uint32_t> seen;
  for (const auto t : query.tables) {
    if (t >= catalog.table_count()) {
      violations.push_back("unknown table index " + std::to_string(t));
      continue;
    }
    if (!seen.insert(t).second) violations.push_back("table '" + catalog.table(t).name + "' appears more than once");
  }
  if (!violations.empty()) return violations;

  const auto mask = query.table_mask();
  for (const auto e : query.joins) {
    if (e >= catalog.edges().size()) {
      violations.push_back("unknown join edge index " + std::to_string(e));
      continue;
    }
    const auto& edge = catalog.edge(e);
    if (!(mask >> edge.left.table & 1U) || !(mask >> edge.right.table & 1U)) {
      violations.push_back("join " + catalog.qualified_name(edge.left) + " = " + catalog.qualified_name(edge.right) +
                           " references a table outside the query");
    }
  }
  if (!violations.empty()) return violations;

  if (!is_connected(mask, query.joins, catalog)) violations.emplace_back("join graph is disconnected");

  for (const auto& predicate : query.predicates) {
    const auto& ref = predicate.column;
    if (ref.table >= catalog.table_count() || ref.column >= catalog.table(ref.table).columns.size()) {
      violations.emplace_back("predicate references an unknown column");
      continue;
    }
    const auto name = catalog.qualified_name(ref);
    if (!(mask >> ref.table & 1U)) violations.push_back("predicate column " + name + " is outside the query");
    if (!catalog.column_def(ref).filterable) violations.push_back("predicate column " + name + " is not filterable");
    if (type_of(predicate.literal) != catalog.column_def(ref).type) {
      violations.push_back("predicate literal for " + name + " has type " +
                           std::string(to_string(type_of(predicate.literal))) + ", column is " +
                           std::string(to_string(catalog.column_def(ref).type)));
    }
  }
  return violations;
}

void require_valid(const ConjunctiveQuery& query, const Catalog& catalog) {
  const auto violations = validate_query(query, catalog);
  if (violations.empty()) return;
  std::string message = "invalid query:";
  for (const auto& v : violations) message += " " + v + ";";
  message.pop_back();
  throw Error("query", message);
}

}  // namespace headroom
