#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "headroom/catalog.hpp"
#include "headroom/query.hpp"

namespace headroom {

/**
 * Canonical text: `SELECT COUNT(*) FROM <tables> WHERE <joins> AND <filters>;` with tables, join edges and
 * predicates in canonical order. WHERE is omitted when there is nothing to put in it.
 */
std::string print_sql(const ConjunctiveQuery& query, const Catalog& catalog);

/**
 * Parses the COUNT(*) subset described in docs/grammar.ebnf. Keywords are case-insensitive; identifiers are not.
 * Throws SyntaxError (with the byte offset) on grammar violations and Error("query") on semantic ones: unknown
 * names, literal types, `a = b` without a catalog edge, or a disconnected join graph.
 */
ConjunctiveQuery parse_sql(std::string_view text, const Catalog& catalog);

struct NamedQuery {
  std::string name;
  ConjunctiveQuery query;
};

/** Reads a script of `-- name: <name>` headed blocks, as written by the benchmark exporter. */
std::vector<NamedQuery> parse_sql_script(std::string_view text, const Catalog& catalog);

}  // namespace headroom
