#include "headroom/executor.hpp"

#include <algorithm>
#include <bit>

#include "headroom/error.hpp"
#include "headroom/rng.hpp"

namespace headroom {

namespace {

struct Timeout {};

/** Row-id tuples of the tables still needed above this operator. */
struct Relation {
  std::vector<std::uint32_t> tables;
  std::vector<std::uint32_t> rows;
  std::uint64_t size = 0;

  std::size_t width() const { return tables.size(); }
  std::size_t slot(std::uint32_t table) const {
    return static_cast<std::size_t>(std::find(tables.begin(), tables.end(), table) - tables.begin());
  }
};

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

std::vector<std::uint32_t> tables_of(std::uint64_t mask) {
  std::vector<std::uint32_t> out;
  while (mask) {
    out.push_back(static_cast<std::uint32_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

bool row_passes(const std::vector<Predicate>& filters, const TableData& data, std::size_t row) {
  for (const auto& predicate : filters) {
    const auto& column = data.columns[predicate.column.column];
    const bool pass = std::visit(
        [&](const auto& values) {
          using T = typename std::decay_t<decltype(values)>::value_type;
          return compare_values(values[row], predicate.op, std::get<T>(predicate.literal));
        },
        column.values());
    if (!pass) return false;
  }
  return true;
}

class Executor {
 public:
  Executor(const PhysicalPlan& plan, const Catalog& catalog, const ExecOptions& options)
      : plan_(plan), catalog_(catalog), options_(options), needed_(plan.nodes().size(), 0) {
    // Top-down: a child must keep the row ids of tables that an ancestor join still references.
    for (auto i = static_cast<std::int64_t>(plan.nodes().size()) - 1; i >= 0; --i) {
      const auto& node = plan.nodes()[static_cast<std::size_t>(i)];
      if (node.is_scan) continue;
      std::uint64_t referenced = 0;
      for (const auto e : node.edges) {
        referenced |= table_bit(catalog.edge(e).left.table) | table_bit(catalog.edge(e).right.table);
      }
      const auto wanted = needed_[static_cast<std::size_t>(i)] | referenced;
      needed_[node.left] = wanted & plan.nodes()[node.left].tables;
      needed_[node.right] = wanted & plan.nodes()[node.right].tables;
    }
  }

  Relation run(std::uint32_t index) {
    const auto& node = plan_.nodes()[index];
    if (node.is_scan) return scan(node, needed_[index]);
    auto left = run(node.left);
    auto right = run(node.right);
    return join(node, left, right, needed_[index]);
  }

  std::uint64_t work() const { return work_; }

 private:
  void charge(std::uint64_t units) {
    work_ = saturating_add(work_, units);
    if (work_ > options_.max_work_units) throw Timeout{};
  }

  void check_charge(std::uint64_t units) const {
    if (saturating_add(work_, units) > options_.max_work_units) throw Timeout{};
  }

  Relation scan(const PlanNode& node, std::uint64_t needed) {
    const auto& data = catalog_.data(node.table);
    charge(data.row_count);
    Relation out;
    out.tables = tables_of(needed);
    for (std::size_t row = 0; row < data.row_count; ++row) {
      if (!row_passes(node.filters, data, row)) continue;
      ++out.size;
      if (!out.tables.empty()) out.rows.push_back(static_cast<std::uint32_t>(row));
    }
    return out;
  }

  struct KeyColumn {
    std::span<const std::int64_t> keys;
    std::size_t slot;
  };

  static std::uint64_t hash_row(const std::vector<KeyColumn>& columns, const Relation& relation, std::uint64_t row) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (const auto& c : columns) {
      const auto id = relation.rows[row * relation.width() + c.slot];
      h = splitmix64(h ^ static_cast<std::uint64_t>(c.keys[id]));
    }
    return h;
  }

  static bool keys_equal(const std::vector<KeyColumn>& a, const Relation& ra, std::uint64_t row_a,
                         const std::vector<KeyColumn>& b, const Relation& rb, std::uint64_t row_b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto ia = ra.rows[row_a * ra.width() + a[i].slot];
      const auto ib = rb.rows[row_b * rb.width() + b[i].slot];
      if (a[i].keys[ia] != b[i].keys[ib]) return false;
    }
    return true;
  }

  Relation join(const PlanNode& node, const Relation& left, const Relation& right, std::uint64_t needed) {
    const bool nested_loop = node.op == JoinOp::NestedLoopJoin;
    const auto input_work =
        nested_loop ? saturating_mul(left.size, right.size) : saturating_add(left.size, right.size);
    check_charge(input_work);

    const auto left_tables = plan_.nodes()[node.left].tables;
    std::vector<KeyColumn> left_keys;
    std::vector<KeyColumn> right_keys;
    for (const auto e : node.edges) {
      auto l = catalog_.edge(e).left;
      auto r = catalog_.edge(e).right;
      if (!(left_tables & table_bit(l.table))) std::swap(l, r);
      left_keys.push_back({catalog_.column(l).keys(), left.slot(l.table)});
      right_keys.push_back({catalog_.column(r).keys(), right.slot(r.table)});
    }

    // Build on the left for BuildLeft and nested loops, on the right for BuildRight.
    const bool build_left = node.op != JoinOp::HashJoinBuildRight;
    const auto& build = build_left ? left : right;
    const auto& probe = build_left ? right : left;
    const auto& build_keys = build_left ? left_keys : right_keys;
    const auto& probe_keys = build_left ? right_keys : left_keys;

    Relation out;
    out.tables = tables_of(needed);
    std::vector<std::pair<bool, std::size_t>> sources;  // (from build side, slot)
    for (const auto t : out.tables) {
      const bool in_build = std::find(build.tables.begin(), build.tables.end(), t) != build.tables.end();
      sources.emplace_back(in_build, in_build ? build.slot(t) : probe.slot(t));
    }
    const auto emit = [&](std::uint64_t build_row, std::uint64_t probe_row) {
      for (const auto& [from_build, slot] : sources) {
        out.rows.push_back(from_build ? build.rows[build_row * build.width() + slot]
                                      : probe.rows[probe_row * probe.width() + slot]);
      }
    };

    if (nested_loop && options_.mode == ExecMode::WallClock) {
      std::uint64_t matches = 0;
      for (std::uint64_t b = 0; b < build.size; ++b) {
        for (std::uint64_t p = 0; p < probe.size; ++p) {
          if (keys_equal(build_keys, build, b, probe_keys, probe, p)) ++matches;
        }
      }
      admit_output(input_work, matches, out);
      if (!out.tables.empty()) {
        out.rows.reserve(matches * out.width());
        for (std::uint64_t b = 0; b < build.size; ++b) {
          for (std::uint64_t p = 0; p < probe.size; ++p) {
            if (keys_equal(build_keys, build, b, probe_keys, probe, p)) emit(b, p);
          }
        }
      }
      return out;
    }

    std::vector<std::pair<std::uint64_t, std::uint32_t>> table;
    table.reserve(build.size);
    for (std::uint64_t b = 0; b < build.size; ++b) {
      table.emplace_back(hash_row(build_keys, build, b), static_cast<std::uint32_t>(b));
    }
    std::sort(table.begin(), table.end());

    const auto for_each_match = [&](auto&& fn) {
      for (std::uint64_t p = 0; p < probe.size; ++p) {
        const auto h = hash_row(probe_keys, probe, p);
        auto it = std::lower_bound(table.begin(), table.end(), std::pair<std::uint64_t, std::uint32_t>{h, 0});
        for (; it != table.end() && it->first == h; ++it) {
          if (keys_equal(build_keys, build, it->second, probe_keys, probe, p)) fn(it->second, p);
        }
      }
    };

    std::uint64_t matches = 0;
    for_each_match([&](std::uint64_t, std::uint64_t) { ++matches; });
    admit_output(input_work, matches, out);
    if (!out.tables.empty()) {
      out.rows.reserve(matches * out.width());
      for_each_match(emit);
    }
    return out;
  }

  void admit_output(std::uint64_t input_work, std::uint64_t matches, Relation& out) {
    charge(saturating_add(input_work, matches));
    if (!out.tables.empty() && matches > options_.max_materialized_rows) throw Timeout{};
    out.size = matches;
  }

  const PhysicalPlan& plan_;
  const Catalog& catalog_;
  const ExecOptions& options_;
  std::vector<std::uint64_t> needed_;
  std::uint64_t work_ = 0;
};

}  // namespace

ExecutionResult execute_plan(const PhysicalPlan& plan, const Catalog& catalog, const ExecOptions& options) {
  if (plan.nodes().empty()) throw Error("argument", "cannot execute an empty plan");
  const auto start = std::chrono::steady_clock::now();
  ExecutionResult result;
  Executor executor(plan, catalog, options);
  try {
    const auto relation = executor.run(plan.root_index());
    result.count = relation.size;
    result.work_units = executor.work();
  } catch (const Timeout&) {
    result.timed_out = true;
    result.count = 0;
    result.work_units = options.max_work_units;
  }
  if (options.mode == ExecMode::WallClock) {
    result.wall_clock = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  }
  return result;
}

std::uint64_t naive_count_oracle(const ConjunctiveQuery& query, const Catalog& catalog, std::uint64_t max_steps) {
  require_valid(query, catalog);

  // Connected visiting order so every table after the first is constrained by an earlier one.
  std::vector<std::uint32_t> order{query.tables.front()};
  std::uint64_t placed = table_bit(order.front());
  while (order.size() < query.tables.size()) {
    for (const auto t : query.tables) {
      if (placed & table_bit(t)) continue;
      const bool adjacent = std::any_of(query.joins.begin(), query.joins.end(), [&](std::uint32_t e) {
        const auto& edge = catalog.edge(e);
        return (edge.left.table == t && (placed & table_bit(edge.right.table))) ||
               (edge.right.table == t && (placed & table_bit(edge.left.table)));
      });
      if (adjacent) {
        order.push_back(t);
        placed |= table_bit(t);
        break;
      }
    }
  }

  // Per table: surviving rows, and for each edge back to an earlier table the (this side, earlier side) columns.
  struct Check {
    std::size_t earlier_depth;
    ColumnRef mine;
    ColumnRef theirs;
  };
  std::vector<std::vector<std::size_t>> rows(order.size());
  std::vector<std::vector<Check>> checks(order.size());
  for (std::size_t d = 0; d < order.size(); ++d) {
    const auto t = order[d];
    const auto& data = catalog.data(t);
    for (std::size_t row = 0; row < data.row_count; ++row) {
      bool pass = true;
      for (const auto& predicate : query.predicates) {
        if (predicate.column.table != t) continue;
        const auto cell = catalog.column(predicate.column).value(row);
        const auto& literal = predicate.literal;
        switch (predicate.op) {
          case CmpOp::Eq:
            pass = cell == literal;
            break;
          case CmpOp::Lt:
            pass = cell < literal;
            break;
          case CmpOp::Gt:
            pass = literal < cell;
            break;
          case CmpOp::Le:
            pass = !(literal < cell);
            break;
          case CmpOp::Ge:
            pass = !(cell < literal);
            break;
          case CmpOp::Ne:
            pass = !(cell == literal);
            break;
        }
        if (!pass) break;
      }
      if (pass) rows[d].push_back(row);
    }
    for (const auto e : query.joins) {
      const auto& edge = catalog.edge(e);
      for (std::size_t earlier = 0; earlier < d; ++earlier) {
        if (edge.left.table == t && edge.right.table == order[earlier]) checks[d].push_back({earlier, edge.left, edge.right});
        if (edge.right.table == t && edge.left.table == order[earlier]) checks[d].push_back({earlier, edge.right, edge.left});
      }
    }
  }

  std::vector<std::size_t> bound(order.size());
  std::uint64_t steps = 0;
  std::uint64_t count = 0;
  const auto visit = [&](auto&& self, std::size_t depth) -> void {
    if (depth == order.size()) {
      ++count;
      return;
    }
    for (const auto row : rows[depth]) {
      if (++steps > max_steps) throw Error("execution", "oracle enumeration limit exceeded");
      bool ok = true;
      for (const auto& check : checks[depth]) {
        if (!(catalog.column(check.mine).value(row) == catalog.column(check.theirs).value(bound[check.earlier_depth]))) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      bound[depth] = row;
      self(self, depth + 1);
    }
  };
  visit(visit, 0);
  return count;
}

}  // namespace headroom
