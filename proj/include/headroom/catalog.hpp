#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "headroom/value.hpp"

namespace headroom {

inline constexpr std::size_t kMaxTables = 64;
inline constexpr std::size_t kAnchorCount = 16;

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Integer;
  bool filterable = false;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;

  std::optional<std::uint32_t> column_index(std::string_view column_name) const;
};

struct ColumnRef {
  std::uint32_t table = 0;
  std::uint32_t column = 0;

  auto operator<=>(const ColumnRef&) const = default;
};

/** Equijoin edge of the schema join graph; canonically `left.table < right.table`. */
struct JoinEdge {
  ColumnRef left;
  ColumnRef right;

  auto operator<=>(const JoinEdge&) const = default;
};

/** Edge as written in a schema config, by name. */
struct EdgeSpec {
  std::string left_table;
  std::string left_column;
  std::string right_table;
  std::string right_column;
};

using ColumnValues = std::variant<std::vector<std::int64_t>, std::vector<double>, std::vector<std::string>>;

class ColumnData {
 public:
  explicit ColumnData(ColumnValues values);

  ColumnType type() const { return static_cast<ColumnType>(values_.index()); }
  std::size_t size() const;
  Value value(std::size_t row) const;
  const ColumnValues& values() const { return values_; }

  template <typename T>
  const std::vector<T>& as() const {
    return std::get<std::vector<T>>(values_);
  }

  /** Equality-preserving 64-bit keys: two cells of same-typed columns are equal iff their keys are. */
  std::span<const std::int64_t> keys() const { return keys_; }

 private:
  friend class Catalog;

  ColumnValues values_;
  std::vector<std::int64_t> keys_;
};

struct TableData {
  std::vector<ColumnData> columns;
  std::size_t row_count = 0;
};

/**
 * Schema, join graph and fully resident column data. Tables and edges are stored in canonical (byte-lexicographic
 * name) order so indices are stable across loads. Immutable after construction.
 */
class Catalog {
 public:
  /** Validates and canonicalizes. `data[i]` holds the columns of `tables[i]` in declaration order. */
  Catalog(std::vector<TableDef> tables, const std::vector<EdgeSpec>& edges, std::vector<std::vector<ColumnValues>> data);

  const std::vector<TableDef>& tables() const { return tables_; }
  const TableDef& table(std::uint32_t index) const { return tables_.at(index); }
  std::size_t table_count() const { return tables_.size(); }
  std::optional<std::uint32_t> table_index(std::string_view name) const;

  const std::vector<JoinEdge>& edges() const { return edges_; }
  const JoinEdge& edge(std::uint32_t index) const { return edges_.at(index); }
  /** Index of the edge joining the two columns, in either orientation. */
  std::optional<std::uint32_t> find_edge(ColumnRef a, ColumnRef b) const;

  const TableData& data(std::uint32_t table) const { return data_.at(table); }
  const ColumnData& column(ColumnRef ref) const { return data_.at(ref.table).columns.at(ref.column); }
  const ColumnDef& column_def(ColumnRef ref) const { return tables_.at(ref.table).columns.at(ref.column); }
  std::size_t row_count(std::uint32_t table) const { return data_.at(table).row_count; }

  /** Sixteen quantile literals per column; the closed literal vocabulary of the query codec. */
  const std::vector<Value>& anchors(ColumnRef ref) const { return anchors_.at(ref.table).at(ref.column); }

  /** Filterable columns of the tables in `table_mask`, ordered by (table, column). */
  std::vector<ColumnRef> filterable_columns(std::uint64_t table_mask) const;

  /** "table.column" */
  std::string qualified_name(ColumnRef ref) const;

  /** Hex fingerprint of schema and data. */
  const std::string& identity() const { return identity_; }

 private:
  std::vector<TableDef> tables_;
  std::vector<JoinEdge> edges_;
  std::vector<TableData> data_;
  std::vector<std::vector<std::vector<Value>>> anchors_;
  std::string identity_;
};

/** Parsed schema config (JSON). The optional generator section is kept as raw JSON text. */
struct SchemaConfig {
  std::vector<TableDef> tables;
  std::vector<std::string> files;
  std::vector<EdgeSpec> edges;
  std::optional<std::string> generator;
};

SchemaConfig parse_schema_config(std::string_view text, std::string_view source_name = "<schema>");

/** Reads one CSV file with a header row matching `table`'s columns in order. */
std::vector<ColumnValues> ingest_csv(const TableDef& table, const std::filesystem::path& file);
std::vector<ColumnValues> ingest_csv_text(const TableDef& table, std::string text, std::string_view source_name);

Catalog load_catalog(const std::filesystem::path& schema_config, const std::filesystem::path& data_dir);

/** Writes schema.json plus one CSV per table; `load_catalog(dir/"schema.json", dir)` restores the catalog. */
void write_catalog(const Catalog& catalog, const std::filesystem::path& dir);

std::string schema_to_json(const Catalog& catalog);
std::string table_to_csv(const Catalog& catalog, std::uint32_t table);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/** 64-bit FNV-1a. */
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

}  // namespace headroom
