#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace headroom {

enum class ColumnType : std::uint8_t { Integer, Float, String };

std::string_view to_string(ColumnType type);
std::optional<ColumnType> parse_column_type(std::string_view name);

/** A literal or cell value. The subset has no NULLs. */
using Value = std::variant<std::int64_t, double, std::string>;

ColumnType type_of(const Value& value);

/** SQL literal text: integers in decimal, floats in shortest round-trip form, strings single-quoted. */
std::string format_literal(const Value& value);

/** Plain cell text as written to CSV (no quoting). */
std::string format_cell(const Value& value);

/** Shortest decimal text that parses back to exactly `value`. */
std::string format_double(double value);

/** Numeric view of a value for histogram interpolation; strings have none. */
std::optional<double> numeric_value(const Value& value);

}  // namespace headroom
