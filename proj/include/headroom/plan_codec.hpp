#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "headroom/catalog.hpp"
#include "headroom/plan.hpp"
#include "headroom/query.hpp"

namespace headroom {

inline constexpr std::size_t kPlanTokens = 64;
inline constexpr std::size_t kTokenVocabulary = 64;

using PlanTokens = std::array<std::uint8_t, kPlanTokens>;

/**
 * Total decoder. Starting from one leaf per query table, each token merges one pair of join-connected trees:
 * candidate pairs are listed by (min table of first tree, min table of second tree); token v selects pair
 * v mod |C| and operator (v div |C|) mod 3. Surplus tokens are ignored.
 */
PhysicalPlan decode_plan(std::span<const std::uint8_t> tokens, const ConjunctiveQuery& query, const Catalog& catalog);

/**
 * Canonical (minimal) token string of `plan`: replays the decoder, at each step merging the earliest candidate
 * pair that is a join of `plan`. Throws Error("codec") if `plan` is not a plan of `query` or needs a token >= 64.
 */
PlanTokens encode_plan(const PhysicalPlan& plan, const ConjunctiveQuery& query, const Catalog& catalog);

/** Number of distinct valid plans (tree shapes times operator choices), saturating at UINT64_MAX. */
std::uint64_t count_plans(const ConjunctiveQuery& query, const Catalog& catalog);

/** Every valid plan exactly once. Throws Error("codec") when more than `limit` plans exist. */
std::vector<PhysicalPlan> enumerate_plans(const ConjunctiveQuery& query, const Catalog& catalog,
                                          std::uint64_t limit = 1'000'000);

/** Space-separated decimal list. */
std::string format_tokens(std::span<const std::uint8_t> tokens);

/** Parses a space-separated list of exactly `expected` tokens in [0, 63]. */
std::vector<std::uint8_t> parse_tokens(std::string_view text, std::size_t expected);

}  // namespace headroom
