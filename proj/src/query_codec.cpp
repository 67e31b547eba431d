#include "headroom/query_codec.hpp"

#include <algorithm>
#include <bit>

#include "headroom/error.hpp"
#include "headroom/plan_codec.hpp"

namespace headroom {

namespace {

/** Catalog edges leading from the selected set to a table outside it, in canonical edge order. */
std::vector<std::uint32_t> frontier(std::uint64_t selected, const Catalog& catalog) {
  std::vector<std::uint32_t> result;
  for (std::uint32_t e = 0; e < catalog.edges().size(); ++e) {
    const auto l = table_bit(catalog.edge(e).left.table);
    const auto r = table_bit(catalog.edge(e).right.table);
    if (((selected & l) != 0) != ((selected & r) != 0)) result.push_back(e);
  }
  return result;
}

std::uint64_t other_end(std::uint32_t e, std::uint64_t selected, const Catalog& catalog) {
  const auto l = table_bit(catalog.edge(e).left.table);
  const auto r = table_bit(catalog.edge(e).right.table);
  return (selected & l) ? r : l;
}

std::vector<std::uint32_t> tables_of(std::uint64_t mask) {
  std::vector<std::uint32_t> out;
  for (; mask; mask &= mask - 1) out.push_back(static_cast<std::uint32_t>(std::countr_zero(mask)));
  return out;
}

}  // namespace

ConjunctiveQuery decode_query(std::span<const std::uint8_t> tokens, const Catalog& catalog) {
  const auto token = [&](std::size_t i) -> std::size_t { return i < tokens.size() ? tokens[i] : 0; };
  const auto n = catalog.table_count();

  std::uint64_t selected = table_bit(static_cast<std::uint32_t>(token(QueryLayout::kStartTable) % n));
  const auto joins = std::min(token(QueryLayout::kJoinCount) % n, QueryLayout::kMaxJoins);
  for (std::size_t step = 0; step < joins; ++step) {
    const auto edges = frontier(selected, catalog);
    if (edges.empty()) break;
    selected |= other_end(edges[token(QueryLayout::kFirstJoin + step) % edges.size()], selected, catalog);
  }

  ConjunctiveQuery query;
  query.tables = tables_of(selected);
  query.joins = implied_edges(selected, catalog);

  const auto columns = catalog.filterable_columns(selected);
  for (std::size_t slot = 0; slot < QueryLayout::kPredicateSlots; ++slot) {
    const auto base = QueryLayout::kFirstPredicate + slot * QueryLayout::kSlotWidth;
    const auto choice = token(base) % (columns.size() + 1);
    if (choice == 0) continue;
    const auto column = columns[choice - 1];
    const auto op = kCmpOps[token(base + 1) % kCmpOps.size()];
    const auto& literal = catalog.anchors(column)[token(base + 2) % kAnchorCount];
    query.predicates.push_back({column, op, literal});
  }
  query.canonicalize();
  return query;
}

QueryTokens encode_query(const ConjunctiveQuery& query, const Catalog& catalog) {
  require_valid(query, catalog);
  auto canonical = query;
  canonical.canonicalize();
  if (canonical.predicates.size() > QueryLayout::kPredicateSlots) {
    throw Error("codec", "query has " + std::to_string(canonical.predicates.size()) +
                             " predicates; the layout holds at most " +
                             std::to_string(QueryLayout::kPredicateSlots));
  }
  const auto target = canonical.table_mask();
  if (canonical.joins != implied_edges(target, catalog)) {
    throw Error("codec", "query joins are not the implied-edge closure of its tables");
  }
  if (canonical.tables.size() - 1 > QueryLayout::kMaxJoins || canonical.tables.size() > catalog.table_count()) {
    throw Error("codec", "query joins more tables than the layout holds");
  }

  QueryTokens tokens{};
  const auto start = canonical.tables.front();
  tokens[QueryLayout::kStartTable] = static_cast<std::uint8_t>(start);
  tokens[QueryLayout::kJoinCount] = static_cast<std::uint8_t>(canonical.tables.size() - 1);
  if (start >= kTokenVocabulary || canonical.tables.size() - 1 >= kTokenVocabulary) {
    throw Error("codec", "table index exceeds the token vocabulary");
  }

  std::uint64_t selected = table_bit(start);
  for (std::size_t step = 0; selected != target; ++step) {
    const auto edges = frontier(selected, catalog);
    std::size_t pick = edges.size();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (other_end(edges[i], selected, catalog) & target) {
        pick = i;
        break;
      }
    }
    if (pick == edges.size()) throw Error("codec", "query tables are not reachable by frontier growth");
    if (pick >= kTokenVocabulary) throw Error("codec", "frontier choice exceeds the token vocabulary");
    tokens[QueryLayout::kFirstJoin + step] = static_cast<std::uint8_t>(pick);
    selected |= other_end(edges[pick], selected, catalog);
  }

  const auto columns = catalog.filterable_columns(target);
  for (std::size_t slot = 0; slot < canonical.predicates.size(); ++slot) {
    const auto& predicate = canonical.predicates[slot];
    const auto base = QueryLayout::kFirstPredicate + slot * QueryLayout::kSlotWidth;
    const auto column = std::find(columns.begin(), columns.end(), predicate.column);
    if (column == columns.end()) throw Error("codec", "predicate column is not filterable");
    const auto choice = static_cast<std::size_t>(column - columns.begin()) + 1;
    if (choice >= kTokenVocabulary) throw Error("codec", "predicate column index exceeds the token vocabulary");
    const auto& anchors = catalog.anchors(predicate.column);
    const auto anchor = std::find(anchors.begin(), anchors.end(), predicate.literal);
    if (anchor == anchors.end()) {
      throw Error("codec", "literal " + format_literal(predicate.literal) + " for " +
                               catalog.qualified_name(predicate.column) + " is not one of its anchor values");
    }
    tokens[base] = static_cast<std::uint8_t>(choice);
    tokens[base + 1] = static_cast<std::uint8_t>(predicate.op);
    tokens[base + 2] = static_cast<std::uint8_t>(anchor - anchors.begin());
  }
  return tokens;
}

}  // namespace headroom
