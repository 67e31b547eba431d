#include "headroom/latent.hpp"

#include <algorithm>
#include <cmath>

#include "headroom/error.hpp"

namespace headroom {

std::uint8_t quantize(double z) {
  if (!std::isfinite(z)) throw Error("argument", "latent coordinate is not finite");
  const double p = 1.0 / (1.0 + std::exp(-z));
  const double bucket = std::floor(p * static_cast<double>(kTokenVocabulary));
  return static_cast<std::uint8_t>(std::clamp(bucket, 0.0, static_cast<double>(kTokenVocabulary - 1)));
}

double bucket_center(std::uint8_t token) {
  const double p = (static_cast<double>(token) + 0.5) / static_cast<double>(kTokenVocabulary);
  return std::log(p / (1.0 - p));
}

DecodedPair decode_latent(std::span<const double> z, const Catalog& catalog) {
  if (z.size() != kLatentDim) {
    throw Error("argument", "latent vector has " + std::to_string(z.size()) + " coordinates, expected " +
                                std::to_string(kLatentDim));
  }
  DecodedPair pair;
  for (std::size_t i = 0; i < kQueryTokens; ++i) pair.query_tokens[i] = quantize(z[i]);
  for (std::size_t i = 0; i < kPlanTokens; ++i) pair.plan_tokens[i] = quantize(z[kQueryTokens + i]);
  pair.query = decode_query(pair.query_tokens, catalog);
  pair.plan = decode_plan(pair.plan_tokens, pair.query, catalog);
  return pair;
}

LatentVector latent_from_tokens(const QueryTokens& query_tokens, const PlanTokens& plan_tokens) {
  LatentVector z{};
  for (std::size_t i = 0; i < kQueryTokens; ++i) z[i] = bucket_center(query_tokens[i]);
  for (std::size_t i = 0; i < kPlanTokens; ++i) z[kQueryTokens + i] = bucket_center(plan_tokens[i]);
  return z;
}

LatentVector encode_pair(const ConjunctiveQuery& query, const PhysicalPlan& plan, const Catalog& catalog) {
  return latent_from_tokens(encode_query(query, catalog), encode_plan(plan, query, catalog));
}

}  // namespace headroom
