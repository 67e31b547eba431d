#include "headroom/catalog.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "headroom/csv.hpp"
#include "headroom/error.hpp"
#include "json.hpp"

namespace headroom {

namespace {

using nlohmann::json;

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_keyword(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return upper == "SELECT" || upper == "COUNT" || upper == "FROM" || upper == "WHERE" || upper == "AND";
}

void check_identifier(std::string_view name, std::string_view what) {
  if (!is_identifier(name) || is_keyword(name)) {
    throw Error("config", std::string(what) + " name '" + std::string(name) + "' is not a valid identifier");
  }
}

std::size_t values_size(const ColumnValues& values) {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

std::vector<Value> compute_anchors(const ColumnValues& values) {
  std::vector<Value> anchors;
  anchors.reserve(kAnchorCount);
  std::visit(
      [&](const auto& column) {
        using T = typename std::decay_t<decltype(column)>::value_type;
        const auto n = column.size();
        if (n == 0) {
          anchors.assign(kAnchorCount, Value{T{}});
          return;
        }
        auto sorted = column;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t k = 0; k < kAnchorCount; ++k) {
          const auto index = std::min(n - 1, ((2 * k + 1) * n) / (2 * kAnchorCount));
          anchors.emplace_back(sorted[index]);
        }
      },
      values);
  return anchors;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::pair<std::string, std::string> split_qualified(const std::string& text, std::string_view source) {
  const auto dot = text.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == text.size() || text.find('.', dot + 1) != std::string::npos) {
    throw Error("config", std::string(source) + ": join endpoint '" + text + "' must be table.column");
  }
  return {text.substr(0, dot), text.substr(dot + 1)};
}

void require_keys(const json& object, std::initializer_list<std::string_view> allowed, std::string_view where,
                  std::string_view source) {
  if (!object.is_object()) throw Error("config", std::string(source) + ": " + std::string(where) + " must be an object");
  for (const auto& [key, _] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error("config", std::string(source) + ": unknown key '" + key + "' in " + std::string(where));
    }
  }
}

}  // namespace

std::optional<std::uint32_t> TableDef::column_index(std::string_view column_name) const {
  for (std::uint32_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column_name) return i;
  }
  return std::nullopt;
}

ColumnData::ColumnData(ColumnValues values) : values_(std::move(values)) {}

std::size_t ColumnData::size() const {
  return values_size(values_);
}

Value ColumnData::value(std::size_t row) const {
  return std::visit([row](const auto& column) { return Value{column[row]}; }, values_);
}

Catalog::Catalog(std::vector<TableDef> tables, const std::vector<EdgeSpec>& edges,
                 std::vector<std::vector<ColumnValues>> data) {
  if (tables.size() != data.size()) throw Error("config", "table and data counts differ");
  if (tables.empty()) throw Error("config", "catalog must declare at least one table");
  if (tables.size() > kMaxTables) {
    throw Error("config", "catalog declares " + std::to_string(tables.size()) + " tables; at most " +
                              std::to_string(kMaxTables) + " are supported");
  }

  std::vector<std::size_t> order(tables.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return tables[a].name < tables[b].name; });

  for (const auto index : order) {
    auto& table = tables[index];
    check_identifier(table.name, "table");
    if (!tables_.empty() && tables_.back().name == table.name) {
      throw Error("config", "duplicate table '" + table.name + "'");
    }
    if (table.columns.empty()) throw Error("config", "table '" + table.name + "' has no columns");
    std::set<std::string> seen;
    for (const auto& column : table.columns) {
      check_identifier(column.name, "column");
      if (!seen.insert(column.name).second) {
        throw Error("config", "duplicate column '" + column.name + "' in table '" + table.name + "'");
      }
    }

    auto& columns = data[index];
    if (columns.size() != table.columns.size()) {
      throw Error("config", "table '" + table.name + "' has " + std::to_string(table.columns.size()) +
                                " columns but data for " + std::to_string(columns.size()));
    }
    TableData table_data;
    table_data.row_count = columns.empty() ? 0 : values_size(columns.front());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (static_cast<ColumnType>(columns[c].index()) != table.columns[c].type) {
        throw Error("config", "column '" + table.name + "." + table.columns[c].name + "' data has the wrong type");
      }
      if (values_size(columns[c]) != table_data.row_count) {
        throw Error("config", "columns of table '" + table.name + "' have different lengths");
      }
      if (const auto* floats = std::get_if<std::vector<double>>(&columns[c])) {
        if (!std::all_of(floats->begin(), floats->end(), [](double v) { return std::isfinite(v); })) {
          throw Error("config", "column '" + table.name + "." + table.columns[c].name + "' holds non-finite values");
        }
      }
      table_data.columns.emplace_back(std::move(columns[c]));
    }
    tables_.push_back(std::move(table));
    data_.push_back(std::move(table_data));
  }

  // Join graph.
  using NameKey = std::tuple<std::string, std::string, std::string, std::string>;
  std::vector<std::pair<NameKey, JoinEdge>> resolved;
  std::set<NameKey> seen_edges;
  for (const auto& spec : edges) {
    auto resolve = [&](const std::string& table_name, const std::string& column_name) {
      const auto table = table_index(table_name);
      if (!table) throw Error("config", "join edge references unknown table '" + table_name + "'");
      const auto column = tables_[*table].column_index(column_name);
      if (!column) throw Error("config", "join edge references unknown column '" + table_name + "." + column_name + "'");
      return ColumnRef{*table, *column};
    };
    auto left = resolve(spec.left_table, spec.left_column);
    auto right = resolve(spec.right_table, spec.right_column);
    if (left.table == right.table) {
      throw Error("config", "join edge " + qualified_name(left) + " = " + qualified_name(right) + " is a self-edge");
    }
    if (column_def(left).type != column_def(right).type) {
      throw Error("config", "join edge type mismatch: " + qualified_name(left) + " is " +
                                std::string(to_string(column_def(left).type)) + ", " + qualified_name(right) +
                                " is " + std::string(to_string(column_def(right).type)));
    }
    if (right.table < left.table) std::swap(left, right);
    NameKey key{tables_[left.table].name, column_def(left).name, tables_[right.table].name, column_def(right).name};
    if (!seen_edges.insert(key).second) {
      throw Error("config", "duplicate join edge " + qualified_name(left) + " = " + qualified_name(right));
    }
    resolved.emplace_back(std::move(key), JoinEdge{left, right});
  }
  std::sort(resolved.begin(), resolved.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [_, edge] : resolved) edges_.push_back(edge);

  // Equality keys. Strings are ranked in one catalog-wide dictionary so joins across tables compare by key.
  std::vector<std::string_view> dictionary;
  for (const auto& table : data_) {
    for (const auto& column : table.columns) {
      if (const auto* strings = std::get_if<std::vector<std::string>>(&column.values_)) {
        dictionary.insert(dictionary.end(), strings->begin(), strings->end());
      }
    }
  }
  std::sort(dictionary.begin(), dictionary.end());
  dictionary.erase(std::unique(dictionary.begin(), dictionary.end()), dictionary.end());

  for (auto& table : data_) {
    for (auto& column : table.columns) {
      auto& keys = column.keys_;
      keys.reserve(column.size());
      std::visit(
          [&](const auto& values) {
            using T = typename std::decay_t<decltype(values)>::value_type;
            for (const auto& v : values) {
              if constexpr (std::is_same_v<T, std::int64_t>) {
                keys.push_back(v);
              } else if constexpr (std::is_same_v<T, double>) {
                keys.push_back(std::bit_cast<std::int64_t>(v == 0.0 ? 0.0 : v));
              } else {
                keys.push_back(std::lower_bound(dictionary.begin(), dictionary.end(), v) - dictionary.begin());
              }
            }
          },
          column.values_);
    }
  }

  anchors_.resize(tables_.size());
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    for (const auto& column : data_[t].columns) anchors_[t].push_back(compute_anchors(column.values()));
  }

  std::uint64_t hash = fnv1a(schema_to_json(*this));
  for (std::uint32_t t = 0; t < tables_.size(); ++t) hash = fnv1a(table_to_csv(*this, t), hash);
  identity_ = to_hex(hash);
}

std::optional<std::uint32_t> Catalog::table_index(std::string_view name) const {
  const auto it = std::lower_bound(tables_.begin(), tables_.end(), name,
                                   [](const TableDef& table, std::string_view n) { return table.name < n; });
  if (it == tables_.end() || it->name != name) return std::nullopt;
  return static_cast<std::uint32_t>(it - tables_.begin());
}

std::optional<std::uint32_t> Catalog::find_edge(ColumnRef a, ColumnRef b) const {
  if (b.table < a.table) std::swap(a, b);
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i].left == a && edges_[i].right == b) return i;
  }
  return std::nullopt;
}

std::vector<ColumnRef> Catalog::filterable_columns(std::uint64_t table_mask) const {
  std::vector<ColumnRef> result;
  for (std::uint32_t t = 0; t < tables_.size(); ++t) {
    if (!(table_mask >> t & 1U)) continue;
    for (std::uint32_t c = 0; c < tables_[t].columns.size(); ++c) {
      if (tables_[t].columns[c].filterable) result.push_back({t, c});
    }
  }
  return result;
}

std::string Catalog::qualified_name(ColumnRef ref) const {
  return tables_.at(ref.table).name + "." + column_def(ref).name;
}

SchemaConfig parse_schema_config(std::string_view text, std::string_view source_name) {
  const std::string source(source_name);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error("config", source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": config syntax error");
  }

  SchemaConfig config;
  try {
    require_keys(root, {"tables", "joins", "generator"}, "schema", source);
    if (!root.contains("tables") || !root["tables"].is_array()) {
      throw Error("config", source + ": 'tables' must be a list");
    }
    for (const auto& entry : root["tables"]) {
      require_keys(entry, {"name", "file", "columns", "filterable"}, "table", source);
      TableDef table;
      table.name = entry.at("name").get<std::string>();
      for (const auto& column_entry : entry.at("columns")) {
        require_keys(column_entry, {"name", "type", "filterable"}, "column", source);
        ColumnDef column;
        column.name = column_entry.at("name").get<std::string>();
        const auto type_name = column_entry.at("type").get<std::string>();
        const auto type = parse_column_type(type_name);
        if (!type) {
          throw Error("config", source + ": unknown type name '" + type_name + "' for column '" + table.name + "." +
                                    column.name + "'");
        }
        column.type = *type;
        column.filterable = column_entry.value("filterable", false);
        table.columns.push_back(std::move(column));
      }
      if (entry.contains("filterable")) {
        for (const auto& name : entry["filterable"]) {
          const auto index = table.column_index(name.get<std::string>());
          if (!index) {
            throw Error("config", source + ": filterable column '" + name.get<std::string>() + "' not in table '" +
                                      table.name + "'");
          }
          table.columns[*index].filterable = true;
        }
      }
      config.files.push_back(entry.value("file", table.name + ".csv"));
      config.tables.push_back(std::move(table));
    }
    if (root.contains("joins")) {
      for (const auto& join : root["joins"]) {
        require_keys(join, {"left", "right"}, "join", source);
        const auto [lt, lc] = split_qualified(join.at("left").get<std::string>(), source);
        const auto [rt, rc] = split_qualified(join.at("right").get<std::string>(), source);
        config.edges.push_back({lt, lc, rt, rc});
      }
    }
    if (root.contains("generator")) config.generator = root["generator"].dump();
  } catch (const json::exception& e) {
    throw Error("config", source + ": " + e.what());
  }
  return config;
}

std::vector<ColumnValues> ingest_csv_text(const TableDef& table, std::string text, std::string_view source_name) {
  const std::string source(source_name);
  CsvReader reader(std::move(text), source);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw Error("data", source + ":1: missing header row");
  if (fields.size() != table.columns.size()) {
    throw Error("data", source + ":1: header has " + std::to_string(fields.size()) + " fields, table '" + table.name +
                            "' has " + std::to_string(table.columns.size()) + " columns");
  }
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (fields[c] != table.columns[c].name) {
      throw Error("data", source + ":1: header field " + std::to_string(c + 1) + " is '" + fields[c] + "', expected '" +
                              table.columns[c].name + "'");
    }
  }

  std::vector<ColumnValues> columns;
  for (const auto& column : table.columns) {
    switch (column.type) {
      case ColumnType::Integer:
        columns.emplace_back(std::vector<std::int64_t>{});
        break;
      case ColumnType::Float:
        columns.emplace_back(std::vector<double>{});
        break;
      case ColumnType::String:
        columns.emplace_back(std::vector<std::string>{});
        break;
    }
  }

  std::size_t row = 0;
  while (reader.next(fields)) {
    // A trailing blank line is not a row.
    if (fields.size() == 1 && fields[0].empty() && table.columns.size() > 1) continue;
    ++row;
    const auto where = [&](std::size_t c) {
      return source + ":" + std::to_string(reader.line()) + ": row " + std::to_string(row) + ", column '" +
             table.columns[c].name + "'";
    };
    if (fields.size() != table.columns.size()) {
      throw Error("data", source + ":" + std::to_string(reader.line()) + ": row " + std::to_string(row) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(table.columns.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& field = fields[c];
      switch (table.columns[c].type) {
        case ColumnType::Integer: {
          std::int64_t v = 0;
          const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
          if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
            throw Error("data", where(c) + ": cannot parse '" + field + "' as integer");
          }
          std::get<std::vector<std::int64_t>>(columns[c]).push_back(v);
          break;
        }
        case ColumnType::Float: {
          double v = 0;
          const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
          if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
            throw Error("data", where(c) + ": cannot parse '" + field + "' as float");
          }
          std::get<std::vector<double>>(columns[c]).push_back(v);
          break;
        }
        case ColumnType::String:
          std::get<std::vector<std::string>>(columns[c]).push_back(field);
          break;
      }
    }
  }
  return columns;
}

std::vector<ColumnValues> ingest_csv(const TableDef& table, const std::filesystem::path& file) {
  return ingest_csv_text(table, read_file(file), file.string());
}

Catalog load_catalog(const std::filesystem::path& schema_config, const std::filesystem::path& data_dir) {
  auto config = parse_schema_config(read_file(schema_config), schema_config.string());
  std::vector<std::vector<ColumnValues>> data;
  for (std::size_t t = 0; t < config.tables.size(); ++t) {
    const auto path = data_dir / config.files[t];
    if (!std::filesystem::exists(path)) {
      throw Error("data", path.string() + ": data file for table '" + config.tables[t].name + "' does not exist");
    }
    data.push_back(ingest_csv(config.tables[t], path));
  }
  return Catalog(std::move(config.tables), config.edges, std::move(data));
}

std::string schema_to_json(const Catalog& catalog) {
  json root;
  root["tables"] = json::array();
  for (const auto& table : catalog.tables()) {
    json entry;
    entry["name"] = table.name;
    entry["file"] = table.name + ".csv";
    entry["columns"] = json::array();
    for (const auto& column : table.columns) {
      entry["columns"].push_back({{"name", column.name}, {"type", std::string(to_string(column.type))}});
      if (column.filterable) entry["columns"].back()["filterable"] = true;
    }
    root["tables"].push_back(std::move(entry));
  }
  root["joins"] = json::array();
  for (const auto& edge : catalog.edges()) {
    root["joins"].push_back({{"left", catalog.qualified_name(edge.left)}, {"right", catalog.qualified_name(edge.right)}});
  }
  return root.dump(2) + "\n";
}

std::string table_to_csv(const Catalog& catalog, std::uint32_t table) {
  const auto& def = catalog.table(table);
  const auto& data = catalog.data(table);
  std::string out;
  for (std::size_t c = 0; c < def.columns.size(); ++c) {
    if (c) out.push_back(',');
    out += def.columns[c].name;
  }
  out.push_back('\n');
  for (std::size_t row = 0; row < data.row_count; ++row) {
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
      if (c) out.push_back(',');
      const auto& column = data.columns[c];
      if (column.type() == ColumnType::String) {
        out += csv_escape(column.as<std::string>()[row]);
      } else {
        out += format_cell(column.value(row));
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_catalog(const Catalog& catalog, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io", dir.string() + ": cannot create directory: " + ec.message());
  write_file(dir / "schema.json", schema_to_json(catalog));
  for (std::uint32_t t = 0; t < catalog.table_count(); ++t) {
    write_file(dir / (catalog.table(t).name + ".csv"), table_to_csv(catalog, t));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", path.string() + ": cannot open file for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("io", path.string() + ": write failed");
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t hash = seed;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace headroom
