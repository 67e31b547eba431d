#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "headroom/catalog.hpp"
#include "headroom/query.hpp"

namespace headroom {

inline constexpr std::size_t kQueryTokens = 256;

/** Token layout of a query string. */
struct QueryLayout {
  static constexpr std::size_t kStartTable = 0;
  static constexpr std::size_t kJoinCount = 1;
  static constexpr std::size_t kFirstJoin = 2;
  static constexpr std::size_t kMaxJoins = 30;  // slots 2..31
  static constexpr std::size_t kFirstPredicate = 32;
  static constexpr std::size_t kPredicateSlots = 8;
  static constexpr std::size_t kSlotWidth = 3;  // column, operator, literal
};

using QueryTokens = std::array<std::uint8_t, kQueryTokens>;

/**
 * Total decoder: start table, requested join count, frontier edge choices, then up to eight (column, operator,
 * anchor literal) predicate slots where column token 0 skips the slot. Every catalog edge between selected tables
 * is added, and the result is canonical. Tokens 56..255 are reserved.
 */
ConjunctiveQuery decode_query(std::span<const std::uint8_t> tokens, const Catalog& catalog);

/**
 * Minimal token string that decodes to `query`. Throws Error("codec") when the query is outside the layout: more
 * than eight predicates, a literal that is not an anchor, or a join set that is not the implied-edge closure.
 */
QueryTokens encode_query(const ConjunctiveQuery& query, const Catalog& catalog);

}  // namespace headroom
