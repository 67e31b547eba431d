#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "headroom/catalog.hpp"
#include "headroom/plan.hpp"
#include "headroom/plan_codec.hpp"
#include "headroom/query.hpp"
#include "headroom/query_codec.hpp"

namespace headroom {

/** z = [z_q; z_p]: one coordinate per query token (256) followed by one per plan token (64). */
inline constexpr std::size_t kLatentDim = kQueryTokens + kPlanTokens;

/** Search box half-width; encoded bucket centers lie within +-4.84. */
inline constexpr double kLatentBound = 5.0;

using LatentVector = std::array<double, kLatentDim>;

struct DecodedPair {
  ConjunctiveQuery query;
  PhysicalPlan plan;
  QueryTokens query_tokens;
  PlanTokens plan_tokens;
};

/** floor(sigmoid(z) * 64) clamped to [0, 63]. Non-finite input is an Error("argument"). */
std::uint8_t quantize(double z);

/** Bucket center logit((token + 0.5) / 64). */
double bucket_center(std::uint8_t token);

/** Quantizes every coordinate, then decodes the query block and the plan block for that query. Total. */
DecodedPair decode_latent(std::span<const double> z, const Catalog& catalog);

/** Bucket centers of the canonical token strings; throws the codec errors of either encoder. */
LatentVector encode_pair(const ConjunctiveQuery& query, const PhysicalPlan& plan, const Catalog& catalog);

LatentVector latent_from_tokens(const QueryTokens& query_tokens, const PlanTokens& plan_tokens);

}  // namespace headroom
