// headroom: command-line front end for catalog ingestion, search runs, benchmark export and reporting.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "headroom/bo.hpp"
#include "headroom/catalog.hpp"
#include "headroom/error.hpp"
#include "headroom/generator.hpp"
#include "headroom/sql.hpp"
#include "headroom/statistics.hpp"
#include "headroom/suite.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace headroom;
using nlohmann::ordered_json;

namespace {

void print_error(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["kind"] = kind;
  j["message"] = message;
  std::cerr << "error: " << j.dump() << '\n';
}

Catalog open_catalog(const fs::path& dir) {
  return load_catalog(dir / "schema.json", dir);
}

struct Common {
  std::optional<std::uint64_t> seed;
  fs::path out;
  fs::path config;
};

void add_common(CLI::App* cmd, Common& common, bool out_required, bool config_required) {
  cmd->add_option("--seed", common.seed, "Random seed (overrides the config file)");
  auto* out = cmd->add_option("--out", common.out, "Output directory or file");
  if (out_required) out->required();
  auto* config = cmd->add_option("--config", common.config, "Config file");
  if (config_required) config->required();
}

ordered_json value_json(const Value& v) {
  switch (type_of(v)) {
    case ColumnType::Integer:
      return std::get<std::int64_t>(v);
    case ColumnType::Float:
      return std::get<double>(v);
    case ColumnType::String:
      return std::get<std::string>(v);
  }
  return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial (query, witness plan) benchmark synthesis", "headroom"};
  app.set_version_flag("--version", std::string(HEADROOM_VERSION));
  app.require_subcommand(1);

  Common ingest_opts;
  fs::path data_dir;
  auto* ingest = app.add_subcommand("ingest", "Load schema + CSV data into a catalog directory");
  add_common(ingest, ingest_opts, true, true);
  ingest->add_option("--data", data_dir, "Directory holding the CSV files (default: the config's directory)");

  Common stats_opts;
  fs::path stats_catalog;
  std::size_t buckets = kDefaultBuckets;
  auto* stats = app.add_subcommand("stats", "Print table and column statistics as JSON");
  add_common(stats, stats_opts, false, false);
  stats->add_option("--catalog", stats_catalog, "Catalog directory")->required();
  stats->add_option("--buckets", buckets, "Histogram buckets per column");

  Common synth_opts;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic catalog from a schema config with a generator");
  add_common(synth, synth_opts, true, true);

  Common run_opts;
  fs::path run_catalog;
  std::optional<std::size_t> iterations;
  std::optional<std::string> strategy;
  bool resume = false;
  auto* run = app.add_subcommand("run", "Run the search and write archive.jsonl and checkpoint.ckpt");
  add_common(run, run_opts, true, false);
  run->add_option("--catalog", run_catalog, "Catalog directory")->required();
  run->add_option("--iterations", iterations, "Search iterations (overrides the config file)");
  run->add_option("--strategy", strategy, "bayesian or random (overrides the config file)");
  run->add_flag("--resume", resume, "Continue from <out>/checkpoint.ckpt when present");

  Common export_opts;
  fs::path export_catalog;
  fs::path archive_path;
  std::size_t k = kDefaultSuiteSize;
  std::string rank = "relative";
  std::uint64_t min_l_default = 10'000;
  auto* exp = app.add_subcommand("export", "Select the top-k pairs of an archive and write benchmark files");
  add_common(exp, export_opts, true, false);
  exp->add_option("--catalog", export_catalog, "Catalog directory")->required();
  exp->add_option("--archive", archive_path, "Archive file (archive.jsonl)")->required();
  exp->add_option("--k", k, "Number of queries");
  exp->add_option("--rank", rank, "relative or absolute");
  exp->add_option("--min-l-default", min_l_default, "Skip queries whose default plan costs fewer work units");

  Common report_opts;
  fs::path suite_dir;
  bool svg = false;
  auto* report = app.add_subcommand("report", "Summarize an exported suite: medians, geometric mean, CDFs");
  add_common(report, report_opts, true, false);
  report->add_option("--suite", suite_dir, "Exported suite directory")->required();
  report->add_flag("--svg", svg, "Also render CDF charts as SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("argument", e.what());
    return 2;
  }

  try {
    if (*ingest) {
      const auto dir = data_dir.empty() ? ingest_opts.config.parent_path() : data_dir;
      const auto catalog = load_catalog(ingest_opts.config, dir);
      write_catalog(catalog, ingest_opts.out);
      std::cout << "catalog " << catalog.identity() << ": " << catalog.table_count() << " tables, "
                << catalog.edges().size() << " join edges -> " << ingest_opts.out.string() << '\n';
    } else if (*stats) {
      const auto catalog = open_catalog(stats_catalog);
      const auto statistics = build_stats(catalog, buckets);
      ordered_json j;
      j["catalog"] = catalog.identity();
      j["buckets"] = buckets;
      for (std::uint32_t t = 0; t < catalog.table_count(); ++t) {
        ordered_json table;
        table["rows"] = catalog.row_count(t);
        for (std::uint32_t c = 0; c < catalog.table(t).columns.size(); ++c) {
          const auto& cs = statistics.column({t, c});
          ordered_json column;
          column["type"] = to_string(catalog.table(t).columns[c].type);
          column["distinct"] = cs.distinct_count;
          auto histogram = ordered_json::array();
          for (const auto& b : cs.histogram) {
            histogram.push_back({value_json(b.lower), value_json(b.upper), b.count, b.distinct});
          }
          column["histogram"] = std::move(histogram);
          table["columns"][catalog.table(t).columns[c].name] = std::move(column);
        }
        j["tables"][catalog.table(t).name] = std::move(table);
      }
      const auto text = j.dump(2) + "\n";
      if (stats_opts.out.empty()) {
        std::cout << text;
      } else {
        write_file(stats_opts.out, text);
      }
    } else if (*synth) {
      auto spec = load_generator_spec(synth_opts.config);
      if (synth_opts.seed) spec.seed = *synth_opts.seed;
      const auto catalog = generate_synthetic(spec);
      write_catalog(catalog, synth_opts.out);
      std::cout << "catalog " << catalog.identity() << ": " << catalog.table_count() << " tables -> "
                << synth_opts.out.string() << '\n';
    } else if (*run) {
      RunConfig config;
      if (!run_opts.config.empty()) {
        config = parse_run_config(read_file(run_opts.config), run_opts.config.parent_path(), run_opts.config.string());
      }
      if (run_opts.seed) config.seed = *run_opts.seed;
      if (iterations) config.iterations = *iterations;
      if (strategy) config.strategy = parse_search_strategy(*strategy);
      fs::create_directories(run_opts.out);
      config.checkpoint_path = run_opts.out / "checkpoint.ckpt";
      config.archive_path = run_opts.out / "archive.jsonl";
      validate_run_config(config);

      const auto catalog = open_catalog(run_catalog);
      const auto statistics = build_stats(catalog);
      BoEngine engine(catalog, statistics, config);
      if (resume && fs::exists(config.checkpoint_path)) engine.load_checkpoint(config.checkpoint_path);
      engine.run();
      const auto best = best_eligible(engine.archive());
      std::cout << "observations " << engine.archive().size() << ", discarded " << engine.state().discarded.size()
                << ", best " << (best ? format_double(*best) : std::string("none")) << " -> "
                << config.archive_path.string() << '\n';
    } else if (*exp) {
      const auto catalog = open_catalog(export_catalog);
      const auto archive = read_archive(archive_path);
      SelectOptions options;
      options.k = k;
      options.rank_mode = parse_objective_mode(rank);
      options.min_l_default = min_l_default;
      const auto suite = select_top_k(archive, options);
      for (const auto& warning : suite.warnings) std::cerr << "warning: " << warning << '\n';
      export_benchmark(suite, {catalog.identity(), HEADROOM_VERSION}, export_opts.out);
      // The exported script must re-parse against the catalog it came from.
      const auto reparsed = parse_sql_script(read_file(export_opts.out / "queries.sql"), catalog);
      std::cout << "exported " << reparsed.size() << " queries -> " << export_opts.out.string() << '\n';
    } else if (*report) {
      const auto suite = load_benchmark(suite_dir);
      const auto summary = summarize(suite);
      fs::create_directories(report_opts.out);
      write_file(report_opts.out / "report.json", report_to_json(summary));
      write_file(report_opts.out / "relative_cdf.csv", cdf_to_csv(summary.relative_cdf));
      write_file(report_opts.out / "absolute_cdf.csv", cdf_to_csv(summary.absolute_cdf));
      if (svg) {
        write_file(report_opts.out / "relative_cdf.svg",
                   cdf_to_svg(summary.relative_cdf, summary.median_relative, "relative headroom", true));
        write_file(report_opts.out / "absolute_cdf.svg",
                   cdf_to_svg(summary.absolute_cdf, summary.median_absolute, "absolute headroom (work units)", false));
      }
      std::cout << "entries " << summary.size << ", median relative " << format_double(summary.median_relative)
                << ", median absolute " << format_double(summary.median_absolute) << ", geometric mean relative "
                << format_double(summary.geometric_mean_relative) << '\n';
    }
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("io", e.what());
    return 1;
  }
  return 0;
}
