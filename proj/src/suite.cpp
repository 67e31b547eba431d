#include "headroom/suite.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "headroom/csv.hpp"
#include "headroom/error.hpp"
#include "json.hpp"

namespace headroom {

using ordered_json = nlohmann::ordered_json;

namespace {

double rank_value(const Observation& o, ObjectiveMode mode) {
  return mode == ObjectiveMode::Relative ? o.relative : o.absolute;
}


std::uint64_t parse_u64(const std::string& text, const std::string& where) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error("data", where + ": '" + text + "' is not a non-negative integer");
  }
  return v;
}

double parse_real(const std::string& text, const std::string& where) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error("data", where + ": '" + text + "' is not a finite number");
  }
  return v;
}

}  // namespace

BenchmarkSuite select_top_k(const std::vector<Observation>& archive, const SelectOptions& options) {
  if (options.k == 0) throw Error("argument", "k must be positive");

  std::map<std::string, const Observation*> best;
  for (const auto& o : archive) {
    if (o.witness_timed_out || o.l_default < options.min_l_default) continue;
    auto& slot = best[o.sql];
    if (!slot || rank_value(o, options.rank_mode) > rank_value(*slot, options.rank_mode)) slot = &o;
  }

  std::vector<const Observation*> ranked;
  for (const auto& [sql, o] : best) ranked.push_back(o);
  std::stable_sort(ranked.begin(), ranked.end(), [&](const Observation* a, const Observation* b) {
    return rank_value(*a, options.rank_mode) > rank_value(*b, options.rank_mode);
  });

  BenchmarkSuite suite;
  for (std::size_t i = 0; i < ranked.size() && i < options.k; ++i) {
    const auto& o = *ranked[i];
    suite.entries.push_back({"q" + std::to_string(i + 1), o.sql, o.witness_plan, o.plan_tokens, o.query_tokens,
                             o.l_default, o.l_witness, o.relative, o.absolute});
  }
  if (suite.entries.size() < options.k) {
    suite.warnings.push_back("requested " + std::to_string(options.k) + " queries but only " +
                             std::to_string(suite.entries.size()) + " distinct candidates are available");
  }
  return suite;
}

std::string suite_queries_sql(const BenchmarkSuite& suite) {
  std::string out;
  for (const auto& e : suite.entries) out += "-- name: " + e.name + "\n" + e.sql + "\n\n";
  return out;
}

std::string suite_headroom_csv(const BenchmarkSuite& suite) {
  std::string out = "name,l_default,l_witness,relative,absolute\n";
  for (const auto& e : suite.entries) {
    out += csv_escape(e.name) + "," + std::to_string(e.l_default) + "," + std::to_string(e.l_witness) + "," +
           format_double(e.relative) + "," + format_double(e.absolute) + "\n";
  }
  return out;
}

void export_benchmark(const BenchmarkSuite& suite, const ExportInfo& info, const std::filesystem::path& out_dir) {
  try {
    std::filesystem::create_directories(out_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error("io", "cannot create " + out_dir.string() + ": " + e.what());
  }
  write_file(out_dir / "queries.sql", suite_queries_sql(suite));

  std::string plans;
  for (const auto& e : suite.entries) {
    ordered_json j;
    j["name"] = e.name;
    j["plan_tokens"] = format_tokens(e.plan_tokens);
    j["plan_text"] = e.witness_plan;
    j["query_tokens"] = format_tokens(e.query_tokens);
    plans += j.dump() + "\n";
  }
  write_file(out_dir / "witness_plans.jsonl", plans);
  write_file(out_dir / "headroom.csv", suite_headroom_csv(suite));

  ordered_json manifest;
  manifest["format"] = "headroom-benchmark";
  manifest["format_version"] = 1;
  manifest["engine_version"] = info.engine_version;
  manifest["catalog_identity"] = info.catalog_identity;
  manifest["entries"] = suite.entries.size();
  manifest["files"] = {"queries.sql", "witness_plans.jsonl", "headroom.csv"};
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

BenchmarkSuite load_benchmark(const std::filesystem::path& dir) {
  BenchmarkSuite suite;
  const auto csv_path = dir / "headroom.csv";
  CsvReader reader(read_file(csv_path), csv_path.string());
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields != std::vector<std::string>{"name", "l_default", "l_witness", "relative", "absolute"}) {
    throw Error("data", csv_path.string() + ":1: expected header name,l_default,l_witness,relative,absolute");
  }
  std::map<std::string, std::size_t> index;
  while (reader.next(fields)) {
    const auto where = csv_path.string() + ":" + std::to_string(reader.line());
    if (fields.size() != 5) throw Error("data", where + ": expected 5 fields, found " + std::to_string(fields.size()));
    SuiteEntry e;
    e.name = fields[0];
    e.l_default = parse_u64(fields[1], where);
    e.l_witness = parse_u64(fields[2], where);
    e.relative = parse_real(fields[3], where);
    e.absolute = parse_real(fields[4], where);
    if (!index.emplace(e.name, suite.entries.size()).second) throw Error("data", where + ": duplicate name " + e.name);
    suite.entries.push_back(std::move(e));
  }

  const auto plans_path = dir / "witness_plans.jsonl";
  if (std::filesystem::exists(plans_path)) {
    std::istringstream plans(read_file(plans_path));
    std::string line;
    while (std::getline(plans, line)) {
      if (line.empty()) continue;
      try {
        const auto j = ordered_json::parse(line);
        const auto it = index.find(j.at("name").get<std::string>());
        if (it == index.end()) continue;
        auto& e = suite.entries[it->second];
        e.witness_plan = j.at("plan_text").get<std::string>();
        const auto p = parse_tokens(j.at("plan_tokens").get<std::string>(), kPlanTokens);
        std::copy(p.begin(), p.end(), e.plan_tokens.begin());
        const auto q = parse_tokens(j.at("query_tokens").get<std::string>(), kQueryTokens);
        std::copy(q.begin(), q.end(), e.query_tokens.begin());
      } catch (const nlohmann::json::exception& ex) {
        throw Error("data", plans_path.string() + ": " + ex.what());
      }
    }
  }

  const auto sql_path = dir / "queries.sql";
  if (std::filesystem::exists(sql_path)) {
    std::istringstream sql(read_file(sql_path));
    std::string line;
    std::string current;
    while (std::getline(sql, line)) {
      if (line.starts_with("-- name: ")) {
        current = line.substr(9);
        continue;
      }
      if (line.empty() || current.empty()) continue;
      if (const auto it = index.find(current); it != index.end()) {
        auto& text = suite.entries[it->second].sql;
        text += text.empty() ? line : "\n" + line;
      }
    }
  }
  return suite;
}

double geometric_mean(const std::vector<double>& values) {
  if (values.empty()) throw Error("argument", "geometric mean of an empty set");
  double sum = 0.0;
  for (const double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error("argument", "geometric mean needs positive finite values, got " + format_double(v));
    }
    sum += std::log(v);
  }
  return std::exp(sum / static_cast<double>(values.size()));
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("argument", "median of an empty set");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<std::pair<double, double>> cdf_points(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> points;
  const auto n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) points.emplace_back(values[i], static_cast<double>(i + 1) / n);
  return points;
}

HeadroomReport summarize(const BenchmarkSuite& suite) {
  if (suite.entries.empty()) throw Error("argument", "cannot summarize an empty suite");
  HeadroomReport report;
  report.size = suite.entries.size();
  for (const auto& e : suite.entries) {
    if (!(e.relative > 0.0)) {
      throw Error("argument", "entry " + e.name + " has nonpositive relative headroom " + format_double(e.relative));
    }
    report.relative.push_back(e.relative);
    report.absolute.push_back(e.absolute);
  }
  std::sort(report.relative.begin(), report.relative.end());
  std::sort(report.absolute.begin(), report.absolute.end());
  report.median_relative = median(report.relative);
  report.median_absolute = median(report.absolute);
  report.geometric_mean_relative = geometric_mean(report.relative);
  report.min_relative = report.relative.front();
  report.max_relative = report.relative.back();
  report.min_absolute = report.absolute.front();
  report.max_absolute = report.absolute.back();
  report.relative_cdf = cdf_points(report.relative);
  report.absolute_cdf = cdf_points(report.absolute);
  return report;
}

std::string report_to_json(const HeadroomReport& r) {
  ordered_json j;
  j["entries"] = r.size;
  j["median_relative"] = r.median_relative;
  j["median_absolute"] = r.median_absolute;
  j["geometric_mean_relative"] = r.geometric_mean_relative;
  j["min_relative"] = r.min_relative;
  j["max_relative"] = r.max_relative;
  j["min_absolute"] = r.min_absolute;
  j["max_absolute"] = r.max_absolute;
  j["relative"] = r.relative;
  j["absolute"] = r.absolute;
  return j.dump(2) + "\n";
}

std::string cdf_to_csv(const std::vector<std::pair<double, double>>& points) {
  std::string out = "value,fraction\n";
  for (const auto& [value, fraction] : points) out += format_double(value) + "," + format_double(fraction) + "\n";
  return out;
}

std::string cdf_to_svg(const std::vector<std::pair<double, double>>& points, double median_value,
                       const std::string& label, bool log_x) {
  constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const bool use_log = log_x && !points.empty() && points.front().first > 0.0;
  const auto tx = [&](double v) { return use_log ? std::log10(v) : v; };

  double lo = points.empty() ? 0.0 : tx(points.front().first);
  double hi = points.empty() ? 1.0 : tx(points.back().first);
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const auto px = [&](double v) { return kLeft + (tx(v) - lo) / (hi - lo) * plot_w; };
  const auto py = [&](double f) { return kTop + (1.0 - f) * plot_h; };
  const auto num = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  std::string path;
  double previous = 0.0;
  for (const auto& [value, fraction] : points) {
    path += path.empty() ? "M" : " L";
    path += num(px(value)) + " " + num(py(previous)) + " L" + num(px(value)) + " " + num(py(fraction));
    previous = fraction;
  }
  if (!path.empty()) svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
  if (!points.empty()) {
    const double mx = px(median_value);
    const double my = py(0.5);
    svg << "<path d=\"M" << num(mx - 6) << " " << num(my - 6) << " L" << num(mx + 6) << " " << num(my + 6) << " M"
        << num(mx - 6) << " " << num(my + 6) << " L" << num(mx + 6) << " " << num(my - 6)
        << "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 30 << "\" font-size=\"12\">" << num(points.front().first)
        << "</text>\n";
    svg << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kHeight - 30 << "\" font-size=\"12\" text-anchor=\"end\">"
        << num(points.back().first) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10 << "\" font-size=\"14\" text-anchor=\"middle\">"
      << label << (use_log ? " (log scale)" : "") << "</text>\n";
  svg << "<text x=\"15\" y=\"" << kTop + plot_h / 2 << "\" font-size=\"14\" transform=\"rotate(-90 15 "
      << kTop + plot_h / 2 << ")\" text-anchor=\"middle\">fraction of queries</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace headroom
