#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "headroom/catalog.hpp"

namespace headroom {

enum class Distribution : std::uint8_t { Uniform, Zipf, Sequential, ForeignKey };

/**
 * Generates integer codes which are then rendered per column type: integers as the code, floats as code + 0.5,
 * strings as "v" followed by the zero-padded code (so string order matches code order).
 */
struct ColumnGenerator {
  Distribution kind = Distribution::Uniform;
  std::uint64_t k = 1;   // domain size for uniform/zipf
  double s = 1.0;        // zipf exponent
  std::string references;  // "table.column" for foreign keys
  double skew = -1.0;    // foreign-key zipf exponent; negative means the spec-wide default
};

enum class CorrelationFn : std::uint8_t { Copy, Mod, Div, Mul, Add };

/** target = fn(source, arg), both integer columns of one table. */
struct Correlation {
  std::string table;
  std::string target;
  std::string source;
  CorrelationFn fn = CorrelationFn::Copy;
  std::int64_t arg = 0;
};

struct TableGenerator {
  std::uint64_t rows = 0;
  std::map<std::string, ColumnGenerator> columns;
};

struct GeneratorSpec {
  std::vector<TableDef> tables;
  std::vector<EdgeSpec> edges;
  std::map<std::string, TableGenerator> generators;
  std::vector<Correlation> correlations;
  double fk_skew = 0.0;
  std::uint64_t seed = 0;
};

/** Reads the "generator" section of a schema config. */
GeneratorSpec parse_generator_spec(const SchemaConfig& config);
GeneratorSpec load_generator_spec(const std::filesystem::path& schema_config);

/** Throws Error("config") on the first violated spec invariant. */
void validate_generator_spec(const GeneratorSpec& spec);

/** Pure function of the spec: equal specs yield byte-identical catalogs. */
Catalog generate_synthetic(const GeneratorSpec& spec);

std::int64_t apply_correlation(CorrelationFn fn, std::int64_t source, std::int64_t arg);

}  // namespace headroom
