#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "headroom/plan_codec.hpp"
#include "headroom/query_codec.hpp"

namespace headroom {

enum class ObjectiveMode : std::uint8_t { Relative, Absolute };

std::string_view to_string(ObjectiveMode mode);
ObjectiveMode parse_objective_mode(std::string_view text);

/** One evaluated (query, witness plan) pair. */
struct Observation {
  QueryTokens query_tokens{};
  PlanTokens plan_tokens{};
  std::string sql;
  std::string default_plan;
  std::string witness_plan;
  std::uint64_t l_default = 0;
  std::uint64_t l_witness = 0;
  bool witness_timed_out = false;
  std::uint64_t count = 0;
  double relative = 0.0;
  double absolute = 0.0;
  double objective = 0.0;
  /** Cheap queries (l_default below the run's threshold) never become the incumbent. */
  bool eligible = true;
  std::uint64_t iteration = 0;
  /** Logical clock: position in the run's evaluation order. */
  std::uint64_t timestamp = 0;
  std::uint64_t seed = 0;
  std::string phase;  // "init", "bo" or "random"

  bool operator==(const Observation& other) const = default;
};

/** L_default / max(1, L_witness), or 0 when the witness timed out. */
double relative_headroom(std::uint64_t l_default, std::uint64_t l_witness, bool witness_timed_out);

/** L_default - L_witness, or -cap (the witness's l_witness) when the witness timed out. */
double absolute_headroom(std::uint64_t l_default, std::uint64_t l_witness, bool witness_timed_out);

double objective_value(ObjectiveMode mode, double relative, double absolute);

/** One JSON object per line; keys in a fixed order so identical archives are byte-identical. */
std::string observation_to_json(const Observation& observation);
Observation observation_from_json(std::string_view line);

std::string archive_to_jsonl(const std::vector<Observation>& archive);
std::vector<Observation> parse_archive(std::string_view text, std::string_view source_name = "<archive>");

void write_archive(const std::filesystem::path& path, const std::vector<Observation>& archive);
std::vector<Observation> read_archive(const std::filesystem::path& path);

}  // namespace headroom
