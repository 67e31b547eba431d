#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "headroom/catalog.hpp"
#include "headroom/query.hpp"

namespace headroom {

inline constexpr std::size_t kDefaultBuckets = 32;

/** One equi-depth bucket over the closed value range [lower, upper]. */
struct HistogramBucket {
  Value lower;
  Value upper;
  std::uint64_t count = 0;
  std::uint64_t distinct = 0;
};

struct ColumnStatistics {
  std::uint64_t row_count = 0;
  std::uint64_t distinct_count = 0;
  std::vector<HistogramBucket> histogram;

  /** Estimated fraction of rows satisfying `column <op> literal`, in [0, 1]. */
  double selectivity(CmpOp op, const Value& literal) const;
};

class Statistics {
 public:
  Statistics(std::vector<std::vector<ColumnStatistics>> columns, std::size_t buckets);

  const ColumnStatistics& column(ColumnRef ref) const { return columns_.at(ref.table).at(ref.column); }
  std::uint64_t row_count(std::uint32_t table) const;
  std::size_t buckets() const { return buckets_; }
  std::size_t table_count() const { return columns_.size(); }

 private:
  std::vector<std::vector<ColumnStatistics>> columns_;
  std::size_t buckets_;
};

/**
 * Builds equi-depth histograms: buckets close once they hold at least ceil(rows / buckets) rows, and never split a
 * run of equal values, so a constant column yields a single bucket.
 */
Statistics build_stats(const Catalog& catalog, std::size_t buckets = kDefaultBuckets);

ColumnStatistics build_column_stats(const ColumnData& column, std::size_t buckets);

}  // namespace headroom
