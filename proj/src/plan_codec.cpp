#include "headroom/plan_codec.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <map>

#include "headroom/error.hpp"

namespace headroom {

namespace {

struct Tree {
  PhysicalPlan plan;
  std::uint64_t tables;
};

/** Forest of partial plans kept sorted by minimum table index. */
class Forest {
 public:
  Forest(const ConjunctiveQuery& query, const Catalog& catalog) : query_(query), catalog_(catalog) {
    for (const auto t : query.tables) trees_.push_back({scan_for(query, t), table_bit(t)});
  }

  std::size_t size() const { return trees_.size(); }

  /** Join-connected tree pairs (i < j), in canonical order. */
  std::vector<std::pair<std::size_t, std::size_t>> candidates() const {
    std::vector<std::pair<std::size_t, std::size_t>> result;
    for (std::size_t i = 0; i < trees_.size(); ++i) {
      for (std::size_t j = i + 1; j < trees_.size(); ++j) {
        if (linked(trees_[i].tables, trees_[j].tables)) result.emplace_back(i, j);
      }
    }
    return result;
  }

  const Tree& tree(std::size_t i) const { return trees_[i]; }

  void merge(std::size_t i, std::size_t j, JoinOp op) {
    auto merged = join_for(query_, op, trees_[i].plan, trees_[j].plan, catalog_);
    const auto tables = trees_[i].tables | trees_[j].tables;
    trees_.erase(trees_.begin() + static_cast<std::ptrdiff_t>(j));
    trees_[i] = {std::move(merged), tables};
    // The merged tree keeps tree i's minimum table, so the order is preserved.
  }

  PhysicalPlan finish() && { return std::move(trees_.front().plan); }

 private:
  bool linked(std::uint64_t a, std::uint64_t b) const {
    for (const auto e : query_.joins) {
      const auto l = table_bit(catalog_.edge(e).left.table);
      const auto r = table_bit(catalog_.edge(e).right.table);
      if (((a & l) && (b & r)) || ((a & r) && (b & l))) return true;
    }
    return false;
  }

  const ConjunctiveQuery& query_;
  const Catalog& catalog_;
  std::vector<Tree> trees_;
};

}  // namespace

PhysicalPlan decode_plan(std::span<const std::uint8_t> tokens, const ConjunctiveQuery& query, const Catalog& catalog) {
  require_valid(query, catalog);
  Forest forest(query, catalog);
  std::size_t next = 0;
  while (forest.size() > 1) {
    const auto candidates = forest.candidates();
    const std::size_t v = next < tokens.size() ? tokens[next] : 0;
    ++next;
    const auto [i, j] = candidates[v % candidates.size()];
    const auto op = kJoinOps[(v / candidates.size()) % kJoinOps.size()];
    forest.merge(i, j, op);
  }
  return std::move(forest).finish();
}

PlanTokens encode_plan(const PhysicalPlan& plan, const ConjunctiveQuery& query, const Catalog& catalog) {
  const auto violations = validate_plan(plan, query, catalog);
  if (!violations.empty()) throw Error("codec", "plan is not a plan of the query: " + violations.front());

  // Join nodes of the target plan keyed by the table sets of their two children.
  std::map<std::pair<std::uint64_t, std::uint64_t>, JoinOp> joins;
  for (const auto& node : plan.nodes()) {
    if (!node.is_scan) joins[{plan.nodes()[node.left].tables, plan.nodes()[node.right].tables}] = node.op;
  }

  PlanTokens tokens{};
  Forest forest(query, catalog);
  std::size_t step = 0;
  while (forest.size() > 1) {
    const auto candidates = forest.candidates();
    bool merged = false;
    for (std::size_t index = 0; index < candidates.size(); ++index) {
      const auto [i, j] = candidates[index];
      const auto it = joins.find({forest.tree(i).tables, forest.tree(j).tables});
      if (it == joins.end()) continue;
      const auto op_index = static_cast<std::size_t>(it->second);
      const auto token = op_index * candidates.size() + index;
      if (token >= kTokenVocabulary || step >= kPlanTokens) {
        throw Error("codec", "plan needs token " + std::to_string(token) + " at step " + std::to_string(step) +
                                 "; not representable in a 64-token vocabulary");
      }
      tokens[step++] = static_cast<std::uint8_t>(token);
      forest.merge(i, j, it->second);
      merged = true;
      break;
    }
    if (!merged) throw Error("codec", "plan cannot be replayed by the decoder");
  }
  return tokens;
}

namespace {

struct PlanSpace {
  const ConjunctiveQuery& query;
  const Catalog& catalog;
  std::vector<std::uint32_t> adjacency;  // local bit sets

  std::uint64_t to_catalog(std::uint32_t local) const {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < query.tables.size(); ++i) {
      if (local >> i & 1U) mask |= table_bit(query.tables[i]);
    }
    return mask;
  }

  bool connected(std::uint32_t subset) const {
    std::uint32_t reached = subset & (~subset + 1);
    for (bool grew = true; grew;) {
      grew = false;
      for (auto r = reached; r; r &= r - 1) {
        const auto next = adjacency[std::countr_zero(r)] & subset & ~reached;
        if (next) {
          reached |= next;
          grew = true;
        }
      }
    }
    return reached == subset;
  }

  bool linked(std::uint32_t a, std::uint32_t b) const {
    for (auto s = a; s; s &= s - 1) {
      if (adjacency[std::countr_zero(s)] & b) return true;
    }
    return false;
  }

  /** Canonical splits: left holds the lowest member; both halves connected and linked. */
  template <typename Fn>
  void for_each_split(std::uint32_t subset, Fn&& fn) const {
    const auto lowest = subset & (~subset + 1);
    for (std::uint32_t left = (subset - 1) & subset; left; left = (left - 1) & subset) {
      if (!(left & lowest)) continue;
      const auto right = subset & ~left;
      if (connected(left) && connected(right) && linked(left, right)) fn(left, right);
    }
  }
};

PlanSpace make_space(const ConjunctiveQuery& query, const Catalog& catalog) {
  require_valid(query, catalog);
  if (query.tables.size() > 20) throw Error("codec", "plan enumeration supports at most 20 tables");
  PlanSpace space{query, catalog, std::vector<std::uint32_t>(query.tables.size(), 0)};
  const auto local = [&](std::uint32_t table) {
    return static_cast<std::size_t>(std::find(query.tables.begin(), query.tables.end(), table) - query.tables.begin());
  };
  for (const auto e : query.joins) {
    const auto l = local(catalog.edge(e).left.table);
    const auto r = local(catalog.edge(e).right.table);
    space.adjacency[l] |= 1U << r;
    space.adjacency[r] |= 1U << l;
  }
  return space;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

}  // namespace

std::uint64_t count_plans(const ConjunctiveQuery& query, const Catalog& catalog) {
  const auto space = make_space(query, catalog);
  const auto n = query.tables.size();
  const std::uint32_t full = (1U << n) - 1;
  std::vector<std::uint64_t> count(static_cast<std::size_t>(full) + 1, 0);
  for (std::uint32_t subset = 1; subset <= full; ++subset) {
    if (std::popcount(subset) == 1) {
      count[subset] = 1;
      continue;
    }
    std::uint64_t total = 0;
    space.for_each_split(subset, [&](std::uint32_t l, std::uint32_t r) {
      const auto ways = saturating_mul(saturating_mul(count[l], count[r]), kJoinOps.size());
      total = total > UINT64_MAX - ways ? UINT64_MAX : total + ways;
    });
    count[subset] = total;
  }
  return count[full];
}

std::vector<PhysicalPlan> enumerate_plans(const ConjunctiveQuery& query, const Catalog& catalog, std::uint64_t limit) {
  const auto total = count_plans(query, catalog);
  if (total > limit) {
    throw Error("codec", "query has " + std::to_string(total) + " plans, more than the limit of " +
                             std::to_string(limit));
  }
  const auto space = make_space(query, catalog);
  const auto n = query.tables.size();
  const std::uint32_t full = (1U << n) - 1;
  std::map<std::uint32_t, std::vector<PhysicalPlan>> memo;
  const auto plans = [&](auto&& self, std::uint32_t subset) -> const std::vector<PhysicalPlan>& {
    if (const auto it = memo.find(subset); it != memo.end()) return it->second;
    std::vector<PhysicalPlan> result;
    if (std::popcount(subset) == 1) {
      result.push_back(scan_for(query, query.tables[static_cast<std::size_t>(std::countr_zero(subset))]));
    } else {
      space.for_each_split(subset, [&](std::uint32_t l, std::uint32_t r) {
        const auto& lefts = self(self, l);
        const auto& rights = self(self, r);
        for (const auto& left : lefts) {
          for (const auto& right : rights) {
            for (const auto op : kJoinOps) result.push_back(join_for(query, op, left, right, catalog));
          }
        }
      });
    }
    return memo.emplace(subset, std::move(result)).first->second;
  };
  return plans(plans, full);
}

std::string format_tokens(std::span<const std::uint8_t> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(tokens[i]);
  }
  return out;
}

std::vector<std::uint8_t> parse_tokens(std::string_view text, std::size_t expected) {
  std::vector<std::uint8_t> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n')) ++pos;
    if (pos >= text.size()) break;
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc{} || value >= kTokenVocabulary) {
      throw Error("codec", "token at offset " + std::to_string(pos) + " is not an integer in [0, 63]");
    }
    tokens.push_back(static_cast<std::uint8_t>(value));
    pos = static_cast<std::size_t>(ptr - text.data());
    if (pos < text.size() && text[pos] != ' ' && text[pos] != '\t' && text[pos] != '\n') {
      throw Error("codec", "unexpected character in token list at offset " + std::to_string(pos));
    }
  }
  if (tokens.size() != expected) {
    throw Error("codec", "expected " + std::to_string(expected) + " tokens, got " + std::to_string(tokens.size()));
  }
  return tokens;
}

}  // namespace headroom
