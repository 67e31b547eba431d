#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "headroom/catalog.hpp"

namespace headroom {

/** Comparison operators, in codec token order. */
enum class CmpOp : std::uint8_t { Eq, Lt, Gt, Le, Ge, Ne };

inline constexpr std::array<CmpOp, 6> kCmpOps = {CmpOp::Eq, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge, CmpOp::Ne};

std::string_view to_string(CmpOp op);

template <typename T>
bool compare_values(const T& cell, CmpOp op, const T& literal) {
  switch (op) {
    case CmpOp::Eq:
      return cell == literal;
    case CmpOp::Lt:
      return cell < literal;
    case CmpOp::Gt:
      return cell > literal;
    case CmpOp::Le:
      return cell <= literal;
    case CmpOp::Ge:
      return cell >= literal;
    case CmpOp::Ne:
      return cell != literal;
  }
  return false;
}

/** `column <op> literal` on a single table. */
struct Predicate {
  ColumnRef column;
  CmpOp op = CmpOp::Eq;
  Value literal;

  bool operator==(const Predicate& other) const = default;
  bool operator<(const Predicate& other) const;
};

/**
 * Conjunctive COUNT(*) query. `tables` are catalog table indices, `joins` catalog edge indices. After
 * `canonicalize()` all three lists are sorted and duplicate predicates are gone, so `==` is semantic equality.
 */
struct ConjunctiveQuery {
  std::vector<std::uint32_t> tables;
  std::vector<std::uint32_t> joins;
  std::vector<Predicate> predicates;

  std::uint64_t table_mask() const;
  void canonicalize();

  bool operator==(const ConjunctiveQuery& other) const = default;
};

/** Empty iff the query is well-formed against the catalog. */
std::vector<std::string> validate_query(const ConjunctiveQuery& query, const Catalog& catalog);

/** Throws Error("query") listing every violation. */
void require_valid(const ConjunctiveQuery& query, const Catalog& catalog);

/** All catalog edges with both endpoints inside `table_mask`, in canonical order. */
std::vector<std::uint32_t> implied_edges(std::uint64_t table_mask, const Catalog& catalog);

/** Whether `table_mask` is connected using only `edges`. */
bool is_connected(std::uint64_t table_mask, const std::vector<std::uint32_t>& edges, const Catalog& catalog);

inline std::uint64_t table_bit(std::uint32_t table) {
  return std::uint64_t{1} << table;
}

}  // namespace headroom
