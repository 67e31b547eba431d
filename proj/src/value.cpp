#include "headroom/value.hpp"

#include <array>
#include <charconv>

namespace headroom {

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Integer:
      return "integer";
    case ColumnType::Float:
      return "float";
    case ColumnType::String:
      return "string";
  }
  return "?";
}

std::optional<ColumnType> parse_column_type(std::string_view name) {
  if (name == "integer") return ColumnType::Integer;
  if (name == "float") return ColumnType::Float;
  if (name == "string") return ColumnType::String;
  return std::nullopt;
}

ColumnType type_of(const Value& value) {
  return static_cast<ColumnType>(value.index());
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

std::string format_cell(const Value& value) {
  switch (type_of(value)) {
    case ColumnType::Integer:
      return std::to_string(std::get<std::int64_t>(value));
    case ColumnType::Float:
      return format_double(std::get<double>(value));
    case ColumnType::String:
      return std::get<std::string>(value);
  }
  return {};
}

std::string format_literal(const Value& value) {
  if (type_of(value) != ColumnType::String) return format_cell(value);
  const auto& text = std::get<std::string>(value);
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('\'');
  for (const char c : text) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::optional<double> numeric_value(const Value& value) {
  switch (type_of(value)) {
    case ColumnType::Integer:
      return static_cast<double>(std::get<std::int64_t>(value));
    case ColumnType::Float:
      return std::get<double>(value);
    case ColumnType::String:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace headroom
