#include "headroom/statistics.hpp"

#include <algorithm>

#include "headroom/error.hpp"

namespace headroom {

namespace {

template <typename T>
ColumnStatistics histogram_of(std::vector<T> values, std::size_t buckets) {
  ColumnStatistics stats;
  stats.row_count = values.size();
  if (values.empty()) return stats;

  std::sort(values.begin(), values.end());
  const auto depth = (values.size() + buckets - 1) / buckets;

  HistogramBucket current;
  bool open = false;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    ++stats.distinct_count;
    if (!open) {
      current = HistogramBucket{values[i], values[i], 0, 0};
      open = true;
    }
    current.upper = values[i];
    current.count += j - i;
    current.distinct += 1;
    if (current.count >= depth) {
      stats.histogram.push_back(std::move(current));
      open = false;
    }
    i = j;
  }
  if (open) stats.histogram.push_back(std::move(current));
  return stats;
}

double equal_mass(const HistogramBucket& bucket) {
  return static_cast<double>(bucket.count) / static_cast<double>(bucket.distinct);
}

}  // namespace

double ColumnStatistics::selectivity(CmpOp op, const Value& literal) const {
  if (row_count == 0) return 0.0;
  const auto rows = static_cast<double>(row_count);

  double eq = 0.0;
  double le = 0.0;
  for (const auto& bucket : histogram) {
    if (type_of(bucket.lower) != type_of(literal)) {
      throw Error("query", "literal type does not match column statistics");
    }
    if (bucket.upper <= literal) {
      le += static_cast<double>(bucket.count);
      if (bucket.upper == literal) eq = equal_mass(bucket);
      continue;
    }
    if (literal < bucket.lower) break;
    // lower <= literal < upper
    const auto at_value = equal_mass(bucket);
    eq = at_value;
    if (literal == bucket.lower) {
      le += at_value;
    } else {
      double fraction = 0.5;
      const auto lo = numeric_value(bucket.lower);
      const auto hi = numeric_value(bucket.upper);
      const auto v = numeric_value(literal);
      if (lo && hi && v && *hi > *lo) fraction = (*v - *lo) / (*hi - *lo);
      le += at_value + (static_cast<double>(bucket.count) - at_value) * fraction;
    }
    break;
  }

  const auto lt = std::max(0.0, le - eq);
  double mass = 0.0;
  switch (op) {
    case CmpOp::Eq:
      mass = eq;
      break;
    case CmpOp::Lt:
      mass = lt;
      break;
    case CmpOp::Le:
      mass = le;
      break;
    case CmpOp::Gt:
      mass = rows - le;
      break;
    case CmpOp::Ge:
      mass = rows - lt;
      break;
    case CmpOp::Ne:
      mass = rows - eq;
      break;
  }
  return std::clamp(mass / rows, 0.0, 1.0);
}

Statistics::Statistics(std::vector<std::vector<ColumnStatistics>> columns, std::size_t buckets)
    : columns_(std::move(columns)), buckets_(buckets) {}

std::uint64_t Statistics::row_count(std::uint32_t table) const {
  const auto& columns = columns_.at(table);
  return columns.empty() ? 0 : columns.front().row_count;
}

ColumnStatistics build_column_stats(const ColumnData& column, std::size_t buckets) {
  if (buckets == 0) throw Error("argument", "histogram bucket count must be positive");
  return std::visit([buckets](const auto& values) { return histogram_of(values, buckets); }, column.values());
}

Statistics build_stats(const Catalog& catalog, std::size_t buckets) {
  if (buckets == 0) throw Error("argument", "histogram bucket count must be positive");
  std::vector<std::vector<ColumnStatistics>> columns(catalog.table_count());
  for (std::uint32_t t = 0; t < catalog.table_count(); ++t) {
    for (const auto& column : catalog.data(t).columns) columns[t].push_back(build_column_stats(column, buckets));
  }
  return Statistics(std::move(columns), buckets);
}

}  // namespace headroom
