#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "headroom/archive.hpp"
#include "headroom/catalog.hpp"
#include "headroom/gp.hpp"
#include "headroom/latent.hpp"
#include "headroom/plan.hpp"
#include "headroom/query.hpp"
#include "headroom/rng.hpp"
#include "headroom/statistics.hpp"

namespace headroom {

struct EvaluatorOptions {
  std::uint64_t default_cap = 1'000'000'000;
  /** Witness cap = factor * max(1, L_default). */
  std::uint64_t witness_factor = 16;
  std::uint64_t max_materialized_rows = 50'000'000;
};

/** The default plan of one canonical query, computed once per catalog. */
struct DefaultEntry {
  std::string plan_text;
  std::uint64_t l_default = 0;
  std::uint64_t count = 0;
  bool timed_out = false;

  bool operator==(const DefaultEntry& other) const = default;
};

struct HeadroomResult {
  /** False when the default plan hit its cap; the pair then has no headroom value. */
  bool evaluable = true;
  std::uint64_t l_default = 0;
  std::uint64_t l_witness = 0;
  bool witness_timed_out = false;
  std::uint64_t count = 0;
  double relative = 0.0;
  double absolute = 0.0;
  std::string default_plan;
};

/** Runs default and witness plans in work-unit mode, caching default plans by canonical SQL. */
class HeadroomEvaluator {
 public:
  HeadroomEvaluator(const Catalog& catalog, const Statistics& stats, EvaluatorOptions options = {});

  /** Throws Error("engine") when both plans finish with different counts. */
  HeadroomResult evaluate(const ConjunctiveQuery& query, const PhysicalPlan& witness);

  const DefaultEntry& default_for(const ConjunctiveQuery& query);

  const std::map<std::string, DefaultEntry>& cache() const { return cache_; }
  void restore_cache(std::map<std::string, DefaultEntry> cache) { cache_ = std::move(cache); }
  /** Number of default-plan executions so far (cache misses). */
  std::size_t default_runs() const { return default_runs_; }

 private:
  const Catalog& catalog_;
  const Statistics& stats_;
  EvaluatorOptions options_;
  std::map<std::string, DefaultEntry> cache_;
  std::size_t default_runs_ = 0;
};

/** Headroom of one pair without a shared cache. */
HeadroomResult headroom(const ConjunctiveQuery& query, const PhysicalPlan& witness, const Catalog& catalog,
                        const Statistics& stats, const EvaluatorOptions& options = {});

enum class SearchStrategy : std::uint8_t { Bayesian, Random };

std::string_view to_string(SearchStrategy strategy);
SearchStrategy parse_search_strategy(std::string_view text);

struct RunConfig {
  ObjectiveMode mode = ObjectiveMode::Relative;
  SearchStrategy strategy = SearchStrategy::Bayesian;
  std::size_t iterations = 300;
  std::size_t initial_samples = 64;
  std::size_t batch_size = 5;
  std::size_t local_candidates = 512;
  std::size_t global_candidates = 512;
  /** Probability that a local candidate moves a given coordinate; at least one coordinate always moves. */
  double perturbation_probability = 20.0 / 320.0;
  double initial_half_width = 2.5;
  double min_half_width = 0.01;
  double max_half_width = 5.0;
  double shrink_factor = 0.5;
  double expand_factor = 1.6;
  std::size_t failure_tolerance = 8;
  EvaluatorOptions evaluator;
  /** Observations with a cheaper default plan are recorded but never become the incumbent. */
  std::uint64_t min_l_default = 10'000;
  std::uint64_t seed = 0;
  /** Hyperparameters are re-searched every `refit_every` steps; in between the model is only extended. */
  std::size_t refit_every = 10;
  std::size_t max_fit_points = 256;
  std::size_t max_gp_points = 2000;
  std::size_t gp_starts = 8;
  /** Save a checkpoint every this many steps (0: only after initialization and at the end). */
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint_path;
  std::filesystem::path archive_path;
};

/** Reads a run config JSON object; unknown keys are errors. Paths are resolved relative to `base_dir`. */
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {},
                           std::string_view source_name = "<run config>");

/** A candidate that produced no observation. */
struct Discarded {
  std::string sql;
  std::string plan;
  std::string reason;

  bool operator==(const Discarded& other) const = default;
};

/** Throws Error("config") on out-of-range settings. */
void validate_run_config(const RunConfig& config);

/** Everything a checkpoint must restore for a bit-identical continuation. */
struct RunState {
  std::vector<Observation> archive;
  bool initialized = false;
  std::size_t iteration = 0;  // completed search steps
  Rng rng;
  double half_width = 2.5;
  std::size_t failures = 0;
  std::optional<double> best_objective;
  std::optional<std::size_t> incumbent;
  std::uint64_t clock = 0;
  std::vector<Discarded> discarded;
  GpHyperparameters hyper;
  bool hyper_fitted = false;
  /** Archive sizes the surrogate was built from: conditioned on the first, then extended at each later one. */
  std::vector<std::size_t> model_segments;

  bool operator==(const RunState& other) const = default;
};

class BoEngine {
 public:
  BoEngine(const Catalog& catalog, const Statistics& stats, RunConfig config);

  /** Evaluates the initial uniform samples. */
  void initialize();

  /** One search iteration: refresh surrogate, propose, evaluate, adapt the trust region. */
  void step();

  /** Initializes if needed, then steps until `config.iterations`, checkpointing as configured. */
  void run();

  /** Candidate latents for the next batch, best EI first. Does not evaluate them. */
  std::vector<LatentVector> propose_batch();

  void save_checkpoint(const std::filesystem::path& path) const;
  /** Replaces the state with a checkpoint written by a run with the same catalog and search settings. */
  void load_checkpoint(const std::filesystem::path& path);

  const RunState& state() const { return state_; }
  const RunConfig& config() const { return config_; }
  void set_iterations(std::size_t iterations) { config_.iterations = iterations; }
  const std::vector<Observation>& archive() const { return state_.archive; }
  HeadroomEvaluator& evaluator() { return evaluator_; }

  /** Surrogate target of an observation (log-relative clipped at 1/16 in relative mode; 0 when ineligible). */
  double surrogate_target(const Observation& observation) const;

 private:
  struct Candidate {
    LatentVector z;
    DecodedPair pair;
    std::string sql;
    std::string plan_text;
  };

  Candidate decode_candidate(const LatentVector& z) const;
  /** z of the canonical token encoding; the quantized tokens when the pair is not encodable. */
  LatentVector canonical_latent(const Candidate& candidate) const;
  void evaluate(const Candidate& candidate, const std::string& phase);
  void refresh_model();
  std::vector<Candidate> proposals();
  bool is_new(const Candidate& candidate) const;
  LatentVector uniform_latent();
  Eigen::MatrixXd training_inputs(std::size_t begin, std::size_t end) const;
  Eigen::VectorXd training_targets(std::size_t begin, std::size_t end) const;
  std::string fingerprint() const;

  const Catalog& catalog_;
  const Statistics& stats_;
  RunConfig config_;
  HeadroomEvaluator evaluator_;
  RunState state_;
  std::set<std::pair<std::string, std::string>> seen_;
  std::optional<GaussianProcess> model_;
};

/** Convenience: a fresh engine run to completion; returns the archive. */
std::vector<Observation> run_search(const Catalog& catalog, const Statistics& stats, const RunConfig& config);

/** Best objective among eligible observations. */
std::optional<double> best_eligible(const std::vector<Observation>& archive);

}  // namespace headroom
