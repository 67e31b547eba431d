#include "headroom/bo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "headroom/error.hpp"
#include "headroom/executor.hpp"
#include "headroom/optimizer.hpp"
#include "headroom/plan_codec.hpp"
#include "headroom/query_codec.hpp"
#include "headroom/sql.hpp"
#include "json.hpp"

namespace headroom {

using ordered_json = nlohmann::ordered_json;

HeadroomEvaluator::HeadroomEvaluator(const Catalog& catalog, const Statistics& stats, EvaluatorOptions options)
    : catalog_(catalog), stats_(stats), options_(options) {}

const DefaultEntry& HeadroomEvaluator::default_for(const ConjunctiveQuery& query) {
  const auto key = print_sql(query, catalog_);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;

  const auto plan = optimize(query, catalog_, stats_).plan;
  ExecOptions exec;
  exec.max_work_units = options_.default_cap;
  exec.max_materialized_rows = options_.max_materialized_rows;
  const auto result = execute_plan(plan, catalog_, exec);
  ++default_runs_;
  DefaultEntry entry{plan.to_text(catalog_), result.work_units, result.count, result.timed_out};
  return cache_.emplace(key, std::move(entry)).first->second;
}

HeadroomResult HeadroomEvaluator::evaluate(const ConjunctiveQuery& query, const PhysicalPlan& witness) {
  const auto& entry = default_for(query);
  HeadroomResult result;
  result.default_plan = entry.plan_text;
  result.l_default = entry.l_default;
  if (entry.timed_out) {
    result.evaluable = false;
    return result;
  }

  if (witness.to_text(catalog_) == entry.plan_text) {
    result.l_witness = entry.l_default;
    result.count = entry.count;
  } else {
    ExecOptions exec;
    exec.max_work_units = options_.witness_factor * std::max<std::uint64_t>(1, entry.l_default);
    exec.max_materialized_rows = options_.max_materialized_rows;
    const auto run = execute_plan(witness, catalog_, exec);
    result.l_witness = run.work_units;
    result.witness_timed_out = run.timed_out;
    result.count = run.timed_out ? entry.count : run.count;
    if (!run.timed_out && run.count != entry.count) {
      throw Error("engine", "witness plan " + witness.to_text(catalog_) + " counted " + std::to_string(run.count) +
                                " rows but the default plan counted " + std::to_string(entry.count) + " for " +
                                print_sql(query, catalog_));
    }
  }
  result.relative = relative_headroom(result.l_default, result.l_witness, result.witness_timed_out);
  result.absolute = absolute_headroom(result.l_default, result.l_witness, result.witness_timed_out);
  return result;
}

HeadroomResult headroom(const ConjunctiveQuery& query, const PhysicalPlan& witness, const Catalog& catalog,
                        const Statistics& stats, const EvaluatorOptions& options) {
  HeadroomEvaluator evaluator(catalog, stats, options);
  return evaluator.evaluate(query, witness);
}

std::string_view to_string(SearchStrategy strategy) {
  return strategy == SearchStrategy::Bayesian ? "bayesian" : "random";
}

SearchStrategy parse_search_strategy(std::string_view text) {
  if (text == "bayesian") return SearchStrategy::Bayesian;
  if (text == "random") return SearchStrategy::Random;
  throw Error("config", "strategy must be 'bayesian' or 'random', got '" + std::string(text) + "'");
}

void validate_run_config(const RunConfig& c) {
  const auto fail = [](const std::string& message) { throw Error("config", message); };
  if (c.initial_samples == 0) fail("initial_samples must be positive");
  if (c.batch_size == 0) fail("batch_size must be positive");
  if (c.strategy == SearchStrategy::Bayesian && c.local_candidates + c.global_candidates == 0) {
    fail("local_candidates + global_candidates must be positive");
  }
  if (!(c.perturbation_probability > 0.0 && c.perturbation_probability <= 1.0)) {
    fail("perturbation_probability must be in (0, 1]");
  }
  if (!(c.min_half_width > 0.0 && c.min_half_width <= c.max_half_width && c.max_half_width <= kLatentBound)) {
    fail("half-width bounds must satisfy 0 < min <= max <= 5");
  }
  if (!(c.initial_half_width >= c.min_half_width && c.initial_half_width <= c.max_half_width)) {
    fail("initial_half_width must lie within the half-width bounds");
  }
  if (!(c.shrink_factor > 0.0 && c.shrink_factor < 1.0)) fail("shrink_factor must be in (0, 1)");
  if (!(c.expand_factor >= 1.0)) fail("expand_factor must be at least 1");
  if (c.failure_tolerance == 0) fail("failure_tolerance must be positive");
  if (c.refit_every == 0) fail("refit_every must be positive");
  if (c.max_fit_points < 2 || c.max_gp_points < 2) fail("max_fit_points and max_gp_points must be at least 2");
  if (c.gp_starts == 0) fail("gp_starts must be positive");
  if (c.evaluator.default_cap == 0 || c.evaluator.witness_factor == 0) {
    fail("default_cap and witness_factor must be positive");
  }
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir, std::string_view source_name) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("config", std::string(source_name) + ": " + e.what());
  }
  if (!j.is_object()) throw Error("config", std::string(source_name) + ": run config must be a JSON object");

  RunConfig c;
  const auto where = [&](const std::string& key) { return std::string(source_name) + ": '" + key + "'"; };
  for (const auto& [key, value] : j.items()) {
    try {
      const auto count = [&] {
        if (!value.is_number_unsigned()) throw Error("config", where(key) + " must be a non-negative integer");
        return value.get<std::uint64_t>();
      };
      const auto real = [&] {
        if (!value.is_number()) throw Error("config", where(key) + " must be a number");
        return value.get<double>();
      };
      const auto path = [&] {
        if (!value.is_string()) throw Error("config", where(key) + " must be a string");
        const std::filesystem::path p = value.get<std::string>();
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
      };
      if (key == "mode") {
        c.mode = parse_objective_mode(value.get<std::string>());
      } else if (key == "strategy") {
        c.strategy = parse_search_strategy(value.get<std::string>());
      } else if (key == "iterations") {
        c.iterations = count();
      } else if (key == "initial_samples") {
        c.initial_samples = count();
      } else if (key == "batch_size") {
        c.batch_size = count();
      } else if (key == "local_candidates") {
        c.local_candidates = count();
      } else if (key == "global_candidates") {
        c.global_candidates = count();
      } else if (key == "perturbation_probability") {
        c.perturbation_probability = real();
      } else if (key == "initial_half_width") {
        c.initial_half_width = real();
      } else if (key == "min_half_width") {
        c.min_half_width = real();
      } else if (key == "max_half_width") {
        c.max_half_width = real();
      } else if (key == "shrink_factor") {
        c.shrink_factor = real();
      } else if (key == "expand_factor") {
        c.expand_factor = real();
      } else if (key == "failure_tolerance") {
        c.failure_tolerance = count();
      } else if (key == "default_cap") {
        c.evaluator.default_cap = count();
      } else if (key == "witness_factor") {
        c.evaluator.witness_factor = count();
      } else if (key == "max_materialized_rows") {
        c.evaluator.max_materialized_rows = count();
      } else if (key == "min_l_default") {
        c.min_l_default = count();
      } else if (key == "seed") {
        c.seed = count();
      } else if (key == "refit_every") {
        c.refit_every = count();
      } else if (key == "max_fit_points") {
        c.max_fit_points = count();
      } else if (key == "max_gp_points") {
        c.max_gp_points = count();
      } else if (key == "gp_starts") {
        c.gp_starts = count();
      } else if (key == "checkpoint_every") {
        c.checkpoint_every = count();
      } else if (key == "checkpoint") {
        c.checkpoint_path = path();
      } else if (key == "archive") {
        c.archive_path = path();
      } else {
        throw Error("config", std::string(source_name) + ": unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("config", where(key) + ": " + e.what());
    }
  }
  validate_run_config(c);
  return c;
}

std::optional<double> best_eligible(const std::vector<Observation>& archive) {
  std::optional<double> best;
  for (const auto& o : archive) {
    if (o.eligible && (!best || o.objective > *best)) best = o.objective;
  }
  return best;
}

BoEngine::BoEngine(const Catalog& catalog, const Statistics& stats, RunConfig config)
    : catalog_(catalog), stats_(stats), config_(std::move(config)), evaluator_(catalog, stats, config_.evaluator) {
  validate_run_config(config_);
  state_.rng = Rng(splitmix64(config_.seed));
  state_.half_width = config_.initial_half_width;
}

double BoEngine::surrogate_target(const Observation& o) const {
  if (!o.eligible) return 0.0;
  if (config_.mode == ObjectiveMode::Relative) return std::log(std::max(o.relative, 1.0 / 16.0));
  return std::max(o.absolute, -static_cast<double>(o.l_default));
}

LatentVector BoEngine::uniform_latent() {
  LatentVector z{};
  for (auto& v : z) v = state_.rng.uniform(-kLatentBound, kLatentBound);
  return z;
}

BoEngine::Candidate BoEngine::decode_candidate(const LatentVector& z) const {
  Candidate c;
  c.z = z;
  c.pair = decode_latent(z, catalog_);
  c.sql = print_sql(c.pair.query, catalog_);
  c.plan_text = c.pair.plan.to_text(catalog_);
  try {
    c.pair.query_tokens = encode_query(c.pair.query, catalog_);
    c.pair.plan_tokens = encode_plan(c.pair.plan, c.pair.query, catalog_);
  } catch (const Error&) {
    // Not representable canonically: keep the quantized tokens, which decode to the same pair.
    for (std::size_t i = 0; i < kQueryTokens; ++i) c.pair.query_tokens[i] = quantize(z[i]);
    for (std::size_t i = 0; i < kPlanTokens; ++i) c.pair.plan_tokens[i] = quantize(z[kQueryTokens + i]);
  }
  return c;
}

LatentVector BoEngine::canonical_latent(const Candidate& candidate) const {
  return latent_from_tokens(candidate.pair.query_tokens, candidate.pair.plan_tokens);
}

bool BoEngine::is_new(const Candidate& candidate) const {
  return !seen_.contains({candidate.sql, candidate.plan_text});
}

void BoEngine::evaluate(const Candidate& candidate, const std::string& phase) {
  seen_.insert({candidate.sql, candidate.plan_text});
  HeadroomResult result;
  try {
    result = evaluator_.evaluate(candidate.pair.query, candidate.pair.plan);
  } catch (const Error& e) {
    if (e.kind() == "engine") throw;
    state_.discarded.push_back({candidate.sql, candidate.plan_text, e.what()});
    return;
  }
  if (!result.evaluable) {
    state_.discarded.push_back({candidate.sql, candidate.plan_text, "default plan exceeded the work-unit cap"});
    return;
  }

  Observation o;
  o.query_tokens = candidate.pair.query_tokens;
  o.plan_tokens = candidate.pair.plan_tokens;
  o.sql = candidate.sql;
  o.default_plan = result.default_plan;
  o.witness_plan = candidate.plan_text;
  o.l_default = result.l_default;
  o.l_witness = result.l_witness;
  o.witness_timed_out = result.witness_timed_out;
  o.count = result.count;
  o.relative = result.relative;
  o.absolute = result.absolute;
  o.objective = objective_value(config_.mode, result.relative, result.absolute);
  o.eligible = result.l_default >= config_.min_l_default;
  o.iteration = state_.iteration + (phase == "init" ? 0 : 1);
  o.timestamp = state_.clock++;
  o.seed = config_.seed;
  o.phase = phase;

  if (o.eligible && (!state_.best_objective || o.objective > *state_.best_objective)) {
    state_.best_objective = o.objective;
    state_.incumbent = state_.archive.size();
  }
  state_.archive.push_back(std::move(o));
}

void BoEngine::initialize() {
  if (state_.initialized) return;
  for (std::size_t i = 0; i < config_.initial_samples; ++i) {
    // Redraw duplicates a bounded number of times; small catalogs may not have enough distinct pairs.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto candidate = decode_candidate(uniform_latent());
      if (!is_new(candidate)) continue;
      evaluate(candidate, "init");
      break;
    }
  }
  state_.initialized = true;
  if (!config_.checkpoint_path.empty()) save_checkpoint(config_.checkpoint_path);
}

Eigen::MatrixXd BoEngine::training_inputs(std::size_t begin, std::size_t end) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(end - begin), static_cast<Eigen::Index>(kLatentDim));
  for (std::size_t i = begin; i < end; ++i) {
    const auto z = latent_from_tokens(state_.archive[i].query_tokens, state_.archive[i].plan_tokens);
    x.row(static_cast<Eigen::Index>(i - begin)) = Eigen::Map<const Eigen::RowVectorXd>(z.data(), kLatentDim);
  }
  return x;
}

Eigen::VectorXd BoEngine::training_targets(std::size_t begin, std::size_t end) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) y(static_cast<Eigen::Index>(i - begin)) = surrogate_target(state_.archive[i]);
  return y;
}

void BoEngine::refresh_model() {
  const auto n = state_.archive.size();
  if (n < 2) {
    model_.reset();
    return;
  }
  const auto targets = training_targets(0, n);
  const bool refit = !state_.hyper_fitted || state_.iteration % config_.refit_every == 0;

  if (n > config_.max_gp_points) {
    // Past the exact-GP budget: condition on the best and most recent rows, rebuilt every step.
    const auto rows = select_training_rows(std::span<const double>(targets.data(), n), config_.max_gp_points);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kLatentDim));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    const auto all = training_inputs(0, n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = all.row(static_cast<Eigen::Index>(rows[i]));
      y(static_cast<Eigen::Index>(i)) = targets(static_cast<Eigen::Index>(rows[i]));
    }
    if (refit) {
      GpConfig gp;
      gp.starts = config_.gp_starts;
      gp.seed = splitmix64(config_.seed ^ (state_.iteration + 1));
      const auto fit_rows = select_training_rows(std::span<const double>(y.data(), rows.size()), config_.max_fit_points);
      model_ = GaussianProcess::fit_subset(x, y, fit_rows, gp);
      state_.hyper = model_->hyperparameters();
      state_.hyper_fitted = true;
    } else {
      model_ = GaussianProcess::condition(x, y, state_.hyper);
    }
    state_.model_segments.clear();
    return;
  }

  if (refit) {
    GpConfig gp;
    gp.starts = config_.gp_starts;
    gp.seed = splitmix64(config_.seed ^ (state_.iteration + 1));
    const auto fit_rows = select_training_rows(std::span<const double>(targets.data(), n), config_.max_fit_points);
    model_ = GaussianProcess::fit_subset(training_inputs(0, n), targets, fit_rows, gp);
    state_.hyper = model_->hyperparameters();
    state_.hyper_fitted = true;
    state_.model_segments = {n};
    return;
  }

  if (!model_) {
    // Rebuild after a resume by replaying the same condition-then-extend sequence.
    if (state_.model_segments.empty()) {
      model_ = GaussianProcess::condition(training_inputs(0, n), targets, state_.hyper);
      state_.model_segments = {n};
      return;
    }
    const auto first = state_.model_segments.front();
    model_ = GaussianProcess::condition(training_inputs(0, first), training_targets(0, first), state_.hyper);
    for (std::size_t s = 1; s < state_.model_segments.size(); ++s) {
      const auto begin = state_.model_segments[s - 1];
      const auto end = state_.model_segments[s];
      model_->extend(training_inputs(begin, end), training_targets(begin, end));
    }
  }
  const auto begin = state_.model_segments.back();
  if (n > begin) {
    model_->extend(training_inputs(begin, n), training_targets(begin, n));
    state_.model_segments.push_back(n);
  }
}

std::vector<BoEngine::Candidate> BoEngine::proposals() {
  std::vector<Candidate> pool;
  pool.reserve(config_.local_candidates + config_.global_candidates);

  std::optional<std::size_t> center_index = state_.incumbent;
  if (!center_index && !state_.archive.empty()) {
    const auto targets = training_targets(0, state_.archive.size());
    Eigen::Index best = 0;
    targets.maxCoeff(&best);
    center_index = static_cast<std::size_t>(best);
  }
  if (center_index) {
    const auto& inc = state_.archive[*center_index];
    const auto center = latent_from_tokens(inc.query_tokens, inc.plan_tokens);
    for (std::size_t i = 0; i < config_.local_candidates; ++i) {
      auto z = center;
      bool moved = false;
      for (std::size_t d = 0; d < kLatentDim; ++d) {
        if (state_.rng.uniform() >= config_.perturbation_probability) continue;
        z[d] = std::clamp(center[d] + state_.rng.uniform(-state_.half_width, state_.half_width), -kLatentBound,
                          kLatentBound);
        moved = true;
      }
      if (!moved) {
        const auto d = state_.rng.below(kLatentDim);
        z[d] = std::clamp(center[d] + state_.rng.uniform(-state_.half_width, state_.half_width), -kLatentBound,
                          kLatentBound);
      }
      pool.push_back(decode_candidate(z));
    }
  }
  for (std::size_t i = 0; i < config_.global_candidates; ++i) pool.push_back(decode_candidate(uniform_latent()));
  return pool;
}

std::vector<LatentVector> BoEngine::propose_batch() {
  refresh_model();
  auto pool = proposals();

  std::vector<double> scores(pool.size(), 0.0);
  if (model_) {
    Eigen::MatrixXd z(static_cast<Eigen::Index>(pool.size()), static_cast<Eigen::Index>(kLatentDim));
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto c = canonical_latent(pool[i]);
      z.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(c.data(), kLatentDim);
    }
    const auto targets = training_targets(0, state_.archive.size());
    const double best = targets.maxCoeff();
    const auto posteriors = model_->posterior(z);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      scores[i] = expected_improvement(posteriors[i].mean, posteriors[i].variance, best);
    }
  }

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<LatentVector> batch;
  std::set<std::pair<std::string, std::string>> chosen;
  for (const auto i : order) {
    if (batch.size() == config_.batch_size) break;
    const auto& c = pool[i];
    if (!is_new(c) || !chosen.insert({c.sql, c.plan_text}).second) continue;
    batch.push_back(canonical_latent(c));
  }
  return batch;
}

void BoEngine::step() {
  if (!state_.initialized) initialize();
  const auto before = state_.best_objective;

  if (config_.strategy == SearchStrategy::Random) {
    for (std::size_t i = 0; i < config_.batch_size; ++i) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        const auto candidate = decode_candidate(uniform_latent());
        if (!is_new(candidate)) continue;
        evaluate(candidate, "random");
        break;
      }
    }
  } else {
    for (const auto& z : propose_batch()) evaluate(decode_candidate(z), "bo");
    const bool improved = state_.best_objective && (!before || *state_.best_objective > *before);
    if (improved) {
      state_.half_width = std::min(config_.max_half_width, state_.half_width * config_.expand_factor);
      state_.failures = 0;
    } else if (++state_.failures >= config_.failure_tolerance) {
      state_.half_width = std::max(config_.min_half_width, state_.half_width * config_.shrink_factor);
      state_.failures = 0;
    }
  }
  ++state_.iteration;
}

void BoEngine::run() {
  initialize();
  while (state_.iteration < config_.iterations) {
    step();
    if (!config_.checkpoint_path.empty() && config_.checkpoint_every > 0 &&
        state_.iteration % config_.checkpoint_every == 0) {
      save_checkpoint(config_.checkpoint_path);
    }
  }
  if (!config_.checkpoint_path.empty()) save_checkpoint(config_.checkpoint_path);
  if (!config_.archive_path.empty()) write_archive(config_.archive_path, state_.archive);
}

std::string BoEngine::fingerprint() const {
  const auto& c = config_;
  ordered_json j;
  j["catalog"] = catalog_.identity();
  j["mode"] = to_string(c.mode);
  j["strategy"] = to_string(c.strategy);
  j["initial_samples"] = c.initial_samples;
  j["batch_size"] = c.batch_size;
  j["local_candidates"] = c.local_candidates;
  j["global_candidates"] = c.global_candidates;
  j["perturbation_probability"] = c.perturbation_probability;
  j["initial_half_width"] = c.initial_half_width;
  j["min_half_width"] = c.min_half_width;
  j["max_half_width"] = c.max_half_width;
  j["shrink_factor"] = c.shrink_factor;
  j["expand_factor"] = c.expand_factor;
  j["failure_tolerance"] = c.failure_tolerance;
  j["default_cap"] = c.evaluator.default_cap;
  j["witness_factor"] = c.evaluator.witness_factor;
  j["max_materialized_rows"] = c.evaluator.max_materialized_rows;
  j["min_l_default"] = c.min_l_default;
  j["seed"] = c.seed;
  j["refit_every"] = c.refit_every;
  j["max_fit_points"] = c.max_fit_points;
  j["max_gp_points"] = c.max_gp_points;
  j["gp_starts"] = c.gp_starts;
  return to_hex(fnv1a(j.dump()));
}

namespace {

constexpr std::string_view kCheckpointMagic = "HEADROOM-CKPT";
constexpr std::string_view kCheckpointVersion = "v1";

}  // namespace

void BoEngine::save_checkpoint(const std::filesystem::path& path) const {
  const auto& s = state_;
  ordered_json j;
  j["fingerprint"] = fingerprint();
  j["initialized"] = s.initialized;
  j["iteration"] = s.iteration;
  j["rng"] = s.rng.state();
  j["half_width"] = s.half_width;
  j["failures"] = s.failures;
  j["best_objective"] = s.best_objective ? ordered_json(*s.best_objective) : ordered_json(nullptr);
  j["incumbent"] = s.incumbent ? ordered_json(*s.incumbent) : ordered_json(nullptr);
  j["clock"] = s.clock;
  j["hyper"] = {s.hyper.lengthscale, s.hyper.signal_variance, s.hyper.noise_variance};
  j["hyper_fitted"] = s.hyper_fitted;
  j["model_segments"] = s.model_segments;
  auto discarded = ordered_json::array();
  for (const auto& d : s.discarded) discarded.push_back({d.sql, d.plan, d.reason});
  j["discarded"] = std::move(discarded);
  auto cache = ordered_json::array();
  for (const auto& [sql, e] : evaluator_.cache()) cache.push_back({sql, e.plan_text, e.l_default, e.count, e.timed_out});
  j["cache"] = std::move(cache);
  auto archive = ordered_json::array();
  for (const auto& o : s.archive) archive.push_back(ordered_json::parse(observation_to_json(o)));
  j["archive"] = std::move(archive);

  const auto payload = j.dump();
  const auto header = std::string(kCheckpointMagic) + " " + std::string(kCheckpointVersion) + " " +
                      to_hex(fnv1a(payload)) + "\n";
  const auto tmp = path.string() + ".tmp";
  try {
    write_file(tmp, header + payload);
    std::filesystem::rename(tmp, path);
  } catch (const std::exception& e) {
    throw Error("io", "cannot write checkpoint " + path.string() + ": " + e.what());
  }
}

void BoEngine::load_checkpoint(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error("checkpoint", e.what());
  }
  const auto newline = text.find('\n');
  const std::string header = text.substr(0, newline);
  const auto fail = [&](const std::string& message) { throw Error("checkpoint", path.string() + ": " + message); };
  if (newline == std::string::npos) fail("missing header line");
  const auto first_space = header.find(' ');
  const auto second_space = header.find(' ', first_space + 1);
  if (header.substr(0, first_space) != kCheckpointMagic || second_space == std::string::npos) {
    fail("not a checkpoint file");
  }
  const auto version = header.substr(first_space + 1, second_space - first_space - 1);
  if (version != kCheckpointVersion) {
    fail("checkpoint version " + version + " is not supported (expected " + std::string(kCheckpointVersion) + ")");
  }
  const auto payload = std::string_view(text).substr(newline + 1);
  if (header.substr(second_space + 1) != to_hex(fnv1a(payload))) fail("checksum mismatch (file corrupt or truncated)");

  try {
    const auto j = ordered_json::parse(payload);
    if (j.at("fingerprint").get<std::string>() != fingerprint()) {
      fail("checkpoint was written for a different catalog or search configuration");
    }
    RunState s;
    s.initialized = j.at("initialized").get<bool>();
    s.iteration = j.at("iteration").get<std::size_t>();
    s.rng.restore(j.at("rng").get<std::string>());
    s.half_width = j.at("half_width").get<double>();
    s.failures = j.at("failures").get<std::size_t>();
    if (!j.at("best_objective").is_null()) s.best_objective = j.at("best_objective").get<double>();
    if (!j.at("incumbent").is_null()) s.incumbent = j.at("incumbent").get<std::size_t>();
    s.clock = j.at("clock").get<std::uint64_t>();
    const auto& h = j.at("hyper");
    s.hyper = {h.at(0).get<double>(), h.at(1).get<double>(), h.at(2).get<double>()};
    s.hyper_fitted = j.at("hyper_fitted").get<bool>();
    s.model_segments = j.at("model_segments").get<std::vector<std::size_t>>();
    for (const auto& d : j.at("discarded")) {
      s.discarded.push_back({d.at(0).get<std::string>(), d.at(1).get<std::string>(), d.at(2).get<std::string>()});
    }
    std::map<std::string, DefaultEntry> cache;
    for (const auto& e : j.at("cache")) {
      cache[e.at(0).get<std::string>()] = {e.at(1).get<std::string>(), e.at(2).get<std::uint64_t>(),
                                           e.at(3).get<std::uint64_t>(), e.at(4).get<bool>()};
    }
    for (const auto& o : j.at("archive")) s.archive.push_back(observation_from_json(o.dump()));

    state_ = std::move(s);
    evaluator_.restore_cache(std::move(cache));
    model_.reset();
    seen_.clear();
    for (const auto& o : state_.archive) seen_.insert({o.sql, o.witness_plan});
    for (const auto& d : state_.discarded) seen_.insert({d.sql, d.plan});
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("malformed payload: ") + e.what());
  }
}

std::vector<Observation> run_search(const Catalog& catalog, const Statistics& stats, const RunConfig& config) {
  BoEngine engine(catalog, stats, config);
  engine.run();
  return engine.archive();
}

}  // namespace headroom
