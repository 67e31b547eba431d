#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "headroom/catalog.hpp"
#include "headroom/generator.hpp"
#include "headroom/query.hpp"
#include "headroom/sql.hpp"

#ifndef HEADROOM_TEST_DATA
#error "HEADROOM_TEST_DATA must point at tests/data"
#endif

namespace headroom::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(HEADROOM_TEST_DATA) / name;
}

/** A(x, c, s) with 10 rows and B(y, d) with 20 rows, joined by A.x = B.y. */
inline const Catalog& ab_catalog() {
  static const Catalog catalog = load_catalog(data_path("ab/schema.json"), data_path("ab"));
  return catalog;
}

/** A(10) <- B(20) <- C(30) chain. */
inline const Catalog& chain_catalog() {
  static const Catalog catalog = load_catalog(data_path("chain/schema.json"), data_path("chain"));
  return catalog;
}

inline Catalog synthetic(const std::string& config) {
  return generate_synthetic(load_generator_spec(data_path(config)));
}

/** Five tables p, q, r, s, t with two join cycles. */
inline const Catalog& five_catalog() {
  static const Catalog catalog = synthetic("five.json");
  return catalog;
}

/** Four tables, at most 1000 rows each, skewed foreign keys and a correlated column. */
inline const Catalog& four_catalog() {
  static const Catalog catalog = synthetic("four.json");
  return catalog;
}

/** Functional dependency item.shade = item.color plus a skewed orders.item_id. */
inline const Catalog& correlated_catalog() {
  static const Catalog catalog = synthetic("correlated.json");
  return catalog;
}

/** A(x) and B(y), both integer and filterable, joined by A.x = B.y. */
inline Catalog two_table(std::vector<std::int64_t> a, std::vector<std::int64_t> b) {
  return Catalog({TableDef{"A", {{"x", ColumnType::Integer, true}}}, TableDef{"B", {{"y", ColumnType::Integer, true}}}},
                 {{"A", "x", "B", "y"}}, {{ColumnValues{std::move(a)}}, {ColumnValues{std::move(b)}}});
}

/** Fresh empty directory under the system temp dir. */
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("headroom_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ConjunctiveQuery sql(const Catalog& catalog, const std::string& text) {
  return parse_sql(text, catalog);
}

}  // namespace headroom::testing
