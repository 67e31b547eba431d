#include "headroom/generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "headroom/error.hpp"
#include "headroom/rng.hpp"
#include "json.hpp"

namespace headroom {

namespace {

using nlohmann::json;

const TableDef* find_table(const GeneratorSpec& spec, const std::string& name) {
  for (const auto& table : spec.tables) {
    if (table.name == name) return &table;
  }
  return nullptr;
}

std::pair<std::string, std::string> split_reference(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) throw Error("config", "foreign key reference '" + text + "' must be table.column");
  return {text.substr(0, dot), text.substr(dot + 1)};
}

/** Inverse-CDF sampler for P(i) proportional to 1 / (i + 1)^s over [0, k). */
class ZipfSampler {
 public:
  ZipfSampler(double s, std::uint64_t k) : cdf_(k) {
    double total = 0.0;
    for (std::uint64_t i = 0; i < k; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_[i] = total;
    }
    for (auto& c : cdf_) c /= total;
    cdf_.back() = 1.0;
  }

  std::uint64_t sample(Rng& rng) const {
    const auto u = rng.uniform();
    return static_cast<std::uint64_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

std::size_t digits(std::uint64_t value) {
  std::size_t n = 1;
  while (value >= 10) {
    value /= 10;
    ++n;
  }
  return n;
}

ColumnValues render(const std::vector<std::int64_t>& codes, ColumnType type, std::uint64_t domain) {
  switch (type) {
    case ColumnType::Integer:
      return codes;
    case ColumnType::Float: {
      std::vector<double> out;
      out.reserve(codes.size());
      for (const auto c : codes) out.push_back(static_cast<double>(c) + 0.5);
      return out;
    }
    case ColumnType::String: {
      const auto width = digits(domain == 0 ? 0 : domain - 1);
      std::vector<std::string> out;
      out.reserve(codes.size());
      for (const auto c : codes) {
        auto text = std::to_string(c);
        if (text.size() < width) text.insert(0, width - text.size(), '0');
        out.push_back("v" + text);
      }
      return out;
    }
  }
  return codes;
}

}  // namespace

std::int64_t apply_correlation(CorrelationFn fn, std::int64_t source, std::int64_t arg) {
  switch (fn) {
    case CorrelationFn::Copy:
      return source;
    case CorrelationFn::Mod: {
      const auto r = source % arg;
      return r < 0 ? r + arg : r;
    }
    case CorrelationFn::Div:
      return source / arg;
    case CorrelationFn::Mul:
      return source * arg;
    case CorrelationFn::Add:
      return source + arg;
  }
  return source;
}

GeneratorSpec parse_generator_spec(const SchemaConfig& config) {
  if (!config.generator) throw Error("config", "schema config has no generator section");
  GeneratorSpec spec;
  spec.tables = config.tables;
  spec.edges = config.edges;
  try {
    const auto root = json::parse(*config.generator);
    for (const auto& [key, _] : root.items()) {
      if (key != "seed" && key != "fk_skew" && key != "tables" && key != "correlations") {
        throw Error("config", "unknown key '" + key + "' in generator");
      }
    }
    spec.seed = root.value("seed", std::uint64_t{0});
    spec.fk_skew = root.value("fk_skew", 0.0);
    for (const auto& [table_name, entry] : root.at("tables").items()) {
      TableGenerator table;
      table.rows = entry.at("rows").get<std::uint64_t>();
      if (entry.contains("columns")) {
        for (const auto& [column_name, column_entry] : entry["columns"].items()) {
          ColumnGenerator column;
          const auto dist = column_entry.at("dist").get<std::string>();
          if (dist == "uniform") {
            column.kind = Distribution::Uniform;
            column.k = column_entry.at("k").get<std::uint64_t>();
          } else if (dist == "zipf") {
            column.kind = Distribution::Zipf;
            column.k = column_entry.at("k").get<std::uint64_t>();
            column.s = column_entry.at("s").get<double>();
          } else if (dist == "sequential") {
            column.kind = Distribution::Sequential;
          } else if (dist == "foreign_key") {
            column.kind = Distribution::ForeignKey;
            column.references = column_entry.at("references").get<std::string>();
            column.skew = column_entry.value("skew", -1.0);
          } else {
            throw Error("config", "unknown distribution '" + dist + "' for " + table_name + "." + column_name);
          }
          table.columns.emplace(column_name, std::move(column));
        }
      }
      spec.generators.emplace(table_name, std::move(table));
    }
    if (root.contains("correlations")) {
      for (const auto& entry : root["correlations"]) {
        Correlation correlation;
        correlation.table = entry.at("table").get<std::string>();
        correlation.target = entry.at("target").get<std::string>();
        correlation.source = entry.at("source").get<std::string>();
        const auto fn = entry.value("fn", std::string("copy"));
        if (fn == "copy") {
          correlation.fn = CorrelationFn::Copy;
        } else if (fn == "mod") {
          correlation.fn = CorrelationFn::Mod;
        } else if (fn == "div") {
          correlation.fn = CorrelationFn::Div;
        } else if (fn == "mul") {
          correlation.fn = CorrelationFn::Mul;
        } else if (fn == "add") {
          correlation.fn = CorrelationFn::Add;
        } else {
          throw Error("config", "unknown correlation function '" + fn + "'");
        }
        correlation.arg = entry.value("arg", std::int64_t{0});
        spec.correlations.push_back(std::move(correlation));
      }
    }
  } catch (const json::exception& e) {
    throw Error("config", std::string("generator: ") + e.what());
  }
  validate_generator_spec(spec);
  return spec;
}

GeneratorSpec load_generator_spec(const std::filesystem::path& schema_config) {
  return parse_generator_spec(parse_schema_config(read_file(schema_config), schema_config.string()));
}

void validate_generator_spec(const GeneratorSpec& spec) {
  for (const auto& [table_name, generator] : spec.generators) {
    const auto* table = find_table(spec, table_name);
    if (!table) throw Error("config", "generator references unknown table '" + table_name + "'");
    for (const auto& [column_name, column] : generator.columns) {
      const auto index = table->column_index(column_name);
      const auto where = table_name + "." + column_name;
      if (!index) throw Error("config", "generator references unknown column '" + where + "'");
      if ((column.kind == Distribution::Uniform || column.kind == Distribution::Zipf) && column.k == 0) {
        throw Error("config", "domain size k of " + where + " must be positive");
      }
      if (column.kind == Distribution::Zipf && !(column.s > 0.0)) {
        throw Error("config", "zipf exponent of " + where + " must be positive");
      }
      if (column.kind == Distribution::ForeignKey) {
        const auto [ref_table, ref_column] = split_reference(column.references);
        const auto* target = find_table(spec, ref_table);
        const auto ref_index = target ? target->column_index(ref_column) : std::nullopt;
        if (!ref_index) throw Error("config", "foreign key " + where + " references unknown column " + column.references);
        if (target->columns[*ref_index].type != table->columns[*index].type) {
          throw Error("config", "foreign key " + where + " type differs from " + column.references);
        }
        if (ref_table == table_name) throw Error("config", "foreign key " + where + " references its own table");
      }
    }
  }
  for (const auto& table : spec.tables) {
    const auto it = spec.generators.find(table.name);
    if (it == spec.generators.end()) throw Error("config", "no generator for table '" + table.name + "'");
  }
  if (spec.fk_skew < 0.0) throw Error("config", "fk_skew must be nonnegative");
  for (const auto& correlation : spec.correlations) {
    const auto* table = find_table(spec, correlation.table);
    if (!table) throw Error("config", "correlation references unknown table '" + correlation.table + "'");
    for (const auto& name : {correlation.target, correlation.source}) {
      const auto index = table->column_index(name);
      if (!index) throw Error("config", "correlation references unknown column '" + correlation.table + "." + name + "'");
      if (table->columns[*index].type != ColumnType::Integer) {
        throw Error("config", "correlated column '" + correlation.table + "." + name + "' must be integer");
      }
    }
    if (correlation.target == correlation.source) throw Error("config", "correlation target equals its source");
    if ((correlation.fn == CorrelationFn::Mod || correlation.fn == CorrelationFn::Div) && correlation.arg == 0) {
      throw Error("config", "correlation mod/div argument must be nonzero");
    }
  }
  for (const auto& table : spec.tables) {
    const auto& generator = spec.generators.at(table.name);
    for (const auto& column : table.columns) {
      const bool has_generator = generator.columns.count(column.name) > 0;
      const bool is_target = std::any_of(spec.correlations.begin(), spec.correlations.end(), [&](const auto& c) {
        return c.table == table.name && c.target == column.name;
      });
      if (has_generator == is_target) {
        throw Error("config", "column '" + table.name + "." + column.name +
                                  (is_target ? "' has both a distribution and a correlation"
                                             : "' has neither a distribution nor a correlation"));
      }
    }
  }
}

Catalog generate_synthetic(const GeneratorSpec& spec) {
  validate_generator_spec(spec);

  // Tables in dependency order: a foreign key's referenced table is generated first.
  std::vector<std::string> order;
  std::set<std::string> done;
  while (order.size() < spec.tables.size()) {
    bool progressed = false;
    for (const auto& table : spec.tables) {
      if (done.count(table.name)) continue;
      bool ready = true;
      for (const auto& [_, column] : spec.generators.at(table.name).columns) {
        if (column.kind == Distribution::ForeignKey && !done.count(split_reference(column.references).first)) {
          ready = false;
        }
      }
      if (ready) {
        order.push_back(table.name);
        done.insert(table.name);
        progressed = true;
      }
    }
    if (!progressed) throw Error("config", "foreign key references form a cycle");
  }

  std::map<std::string, std::vector<ColumnValues>> generated;
  for (const auto& table_name : order) {
    const auto& table = *find_table(spec, table_name);
    const auto& generator = spec.generators.at(table_name);
    const auto rows = generator.rows;
    std::vector<std::optional<std::vector<std::int64_t>>> codes(table.columns.size());
    std::vector<std::optional<ColumnValues>> direct(table.columns.size());
    std::vector<std::uint64_t> domains(table.columns.size(), rows);

    for (std::uint32_t c = 0; c < table.columns.size(); ++c) {
      const auto it = generator.columns.find(table.columns[c].name);
      if (it == generator.columns.end()) continue;
      const auto& column = it->second;
      Rng rng(splitmix64(spec.seed ^ fnv1a(table_name + "." + table.columns[c].name)));
      std::vector<std::int64_t> values(rows);
      switch (column.kind) {
        case Distribution::Sequential:
          for (std::uint64_t r = 0; r < rows; ++r) values[r] = static_cast<std::int64_t>(r);
          break;
        case Distribution::Uniform:
          domains[c] = column.k;
          for (auto& v : values) v = static_cast<std::int64_t>(rng.below(column.k));
          break;
        case Distribution::Zipf: {
          domains[c] = column.k;
          const ZipfSampler sampler(column.s, column.k);
          for (auto& v : values) v = static_cast<std::int64_t>(sampler.sample(rng));
          break;
        }
        case Distribution::ForeignKey: {
          const auto [ref_table, ref_column] = split_reference(column.references);
          const auto& ref_def = *find_table(spec, ref_table);
          const auto& ref_values = generated.at(ref_table)[*ref_def.column_index(ref_column)];
          const auto ref_rows = spec.generators.at(ref_table).rows;
          if (ref_rows == 0 && rows > 0) {
            throw Error("config", "foreign key " + table_name + "." + table.columns[c].name +
                                      " references an empty table");
          }
          std::vector<std::size_t> picks(rows);
          const auto skew = column.skew >= 0.0 ? column.skew : spec.fk_skew;
          if (rows > 0 && skew > 0.0) {
            const ZipfSampler sampler(skew, ref_rows);
            for (auto& p : picks) p = sampler.sample(rng);
          } else if (rows > 0) {
            for (auto& p : picks) p = rng.below(ref_rows);
          }
          direct[c] = std::visit(
              [&](const auto& source) {
                std::decay_t<decltype(source)> out;
                out.reserve(rows);
                for (const auto p : picks) out.push_back(source[p]);
                return ColumnValues{std::move(out)};
              },
              ref_values);
          if (const auto* ints = std::get_if<std::vector<std::int64_t>>(&*direct[c])) values = *ints;
          break;
        }
      }
      codes[c] = std::move(values);
    }

    // Correlations may chain; resolve until every target has been derived.
    std::vector<const Correlation*> pending;
    for (const auto& correlation : spec.correlations) {
      if (correlation.table == table_name) pending.push_back(&correlation);
    }
    while (!pending.empty()) {
      const auto before = pending.size();
      for (auto it = pending.begin(); it != pending.end();) {
        const auto source = *table.column_index((*it)->source);
        const auto target = *table.column_index((*it)->target);
        if (!codes[source]) {
          ++it;
          continue;
        }
        std::vector<std::int64_t> values(rows);
        for (std::uint64_t r = 0; r < rows; ++r) values[r] = apply_correlation((*it)->fn, (*codes[source])[r], (*it)->arg);
        codes[target] = std::move(values);
        it = pending.erase(it);
      }
      if (pending.size() == before) throw Error("config", "correlations in table '" + table_name + "' form a cycle");
    }

    std::vector<ColumnValues> columns;
    for (std::uint32_t c = 0; c < table.columns.size(); ++c) {
      columns.push_back(direct[c] ? std::move(*direct[c]) : render(*codes[c], table.columns[c].type, domains[c]));
    }
    generated.emplace(table_name, std::move(columns));
  }

  std::vector<std::vector<ColumnValues>> data;
  for (const auto& table : spec.tables) data.push_back(std::move(generated.at(table.name)));
  return Catalog(spec.tables, spec.edges, std::move(data));
}

}  // namespace headroom
