#include "headroom/archive.hpp"

#include <algorithm>

#include "headroom/catalog.hpp"
#include "headroom/error.hpp"
#include "json.hpp"

namespace headroom {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ObjectiveMode mode) {
  return mode == ObjectiveMode::Relative ? "relative" : "absolute";
}

ObjectiveMode parse_objective_mode(std::string_view text) {
  if (text == "relative") return ObjectiveMode::Relative;
  if (text == "absolute") return ObjectiveMode::Absolute;
  throw Error("config", "objective mode must be 'relative' or 'absolute', got '" + std::string(text) + "'");
}

double relative_headroom(std::uint64_t l_default, std::uint64_t l_witness, bool witness_timed_out) {
  if (witness_timed_out) return 0.0;
  return static_cast<double>(l_default) / static_cast<double>(std::max<std::uint64_t>(1, l_witness));
}

double absolute_headroom(std::uint64_t l_default, std::uint64_t l_witness, bool witness_timed_out) {
  if (witness_timed_out) return -static_cast<double>(l_witness);
  return static_cast<double>(l_default) - static_cast<double>(l_witness);
}

double objective_value(ObjectiveMode mode, double relative, double absolute) {
  return mode == ObjectiveMode::Relative ? relative : absolute;
}

std::string observation_to_json(const Observation& o) {
  ordered_json j;
  j["iteration"] = o.iteration;
  j["timestamp"] = o.timestamp;
  j["seed"] = o.seed;
  j["phase"] = o.phase;
  j["sql"] = o.sql;
  j["default_plan"] = o.default_plan;
  j["witness_plan"] = o.witness_plan;
  j["l_default"] = o.l_default;
  j["l_witness"] = o.l_witness;
  j["witness_timed_out"] = o.witness_timed_out;
  j["count"] = o.count;
  j["relative"] = o.relative;
  j["absolute"] = o.absolute;
  j["objective"] = o.objective;
  j["eligible"] = o.eligible;
  j["query_tokens"] = format_tokens(o.query_tokens);
  j["plan_tokens"] = format_tokens(o.plan_tokens);
  return j.dump();
}

Observation observation_from_json(std::string_view line) {
  const auto j = ordered_json::parse(line);
  if (!j.is_object()) throw Error("data", "archive record is not a JSON object");
  Observation o;
  o.iteration = j.at("iteration").get<std::uint64_t>();
  o.timestamp = j.at("timestamp").get<std::uint64_t>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.phase = j.at("phase").get<std::string>();
  o.sql = j.at("sql").get<std::string>();
  o.default_plan = j.at("default_plan").get<std::string>();
  o.witness_plan = j.at("witness_plan").get<std::string>();
  o.l_default = j.at("l_default").get<std::uint64_t>();
  o.l_witness = j.at("l_witness").get<std::uint64_t>();
  o.witness_timed_out = j.at("witness_timed_out").get<bool>();
  o.count = j.at("count").get<std::uint64_t>();
  o.relative = j.at("relative").get<double>();
  o.absolute = j.at("absolute").get<double>();
  o.objective = j.at("objective").get<double>();
  o.eligible = j.at("eligible").get<bool>();
  const auto q = parse_tokens(j.at("query_tokens").get<std::string>(), kQueryTokens);
  std::copy(q.begin(), q.end(), o.query_tokens.begin());
  const auto p = parse_tokens(j.at("plan_tokens").get<std::string>(), kPlanTokens);
  std::copy(p.begin(), p.end(), o.plan_tokens.begin());
  return o;
}

std::string archive_to_jsonl(const std::vector<Observation>& archive) {
  std::string out;
  for (const auto& o : archive) {
    out += observation_to_json(o);
    out.push_back('\n');
  }
  return out;
}

std::vector<Observation> parse_archive(std::string_view text, std::string_view source_name) {
  std::vector<Observation> archive;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    ++line_number;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      archive.push_back(observation_from_json(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error("data", std::string(source_name) + ":" + std::to_string(line_number) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("data", std::string(source_name) + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return archive;
}

void write_archive(const std::filesystem::path& path, const std::vector<Observation>& archive) {
  write_file(path, archive_to_jsonl(archive));
}

std::vector<Observation> read_archive(const std::filesystem::path& path) {
  return parse_archive(read_file(path), path.string());
}

}  // namespace headroom
