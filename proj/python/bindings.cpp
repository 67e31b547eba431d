#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "headroom/archive.hpp"
#include "headroom/bo.hpp"
#include "headroom/catalog.hpp"
#include "headroom/error.hpp"
#include "headroom/executor.hpp"
#include "headroom/generator.hpp"
#include "headroom/gp.hpp"
#include "headroom/latent.hpp"
#include "headroom/optimizer.hpp"
#include "headroom/plan_codec.hpp"
#include "headroom/sql.hpp"
#include "headroom/statistics.hpp"
#include "headroom/suite.hpp"

namespace py = pybind11;
using namespace headroom;

namespace {

py::dict execution_dict(const ExecutionResult& r) {
  py::dict d;
  d["count"] = r.count;
  d["work_units"] = r.work_units;
  d["timed_out"] = r.timed_out;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Plan-headroom search: catalogs, codecs, optimizer, executor and Bayesian optimization.";

  static py::exception<Error> headroom_error(m, "HeadroomError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(headroom_error, (e.kind() + ": " + e.what()).c_str());
    }
  });

  py::class_<Catalog, std::shared_ptr<Catalog>>(m, "Catalog")
      .def_static(
          "load",
          [](const std::filesystem::path& schema, const std::filesystem::path& data_dir) {
            return std::make_shared<Catalog>(load_catalog(schema, data_dir));
          },
          py::arg("schema"), py::arg("data_dir"))
      .def_static(
          "synthetic",
          [](const std::filesystem::path& config) {
            return std::make_shared<Catalog>(generate_synthetic(load_generator_spec(config)));
          },
          py::arg("config"), "Generates the catalog described by a schema config with a generator section.")
      .def_property_readonly("table_names",
                             [](const Catalog& c) {
                               std::vector<std::string> names;
                               for (const auto& t : c.tables()) names.push_back(t.name);
                               return names;
                             })
      .def("row_count",
           [](const Catalog& c, const std::string& table) {
             const auto index = c.table_index(table);
             if (!index) throw Error("argument", "unknown table '" + table + "'");
             return c.row_count(*index);
           })
      .def_property_readonly("identity", &Catalog::identity)
      .def("save", [](const Catalog& c, const std::filesystem::path& dir) { write_catalog(c, dir); });

  py::class_<Statistics, std::shared_ptr<Statistics>>(m, "Statistics")
      .def(py::init([](const Catalog& c, std::size_t buckets) { return std::make_shared<Statistics>(build_stats(c, buckets)); }),
           py::arg("catalog"), py::arg("buckets") = kDefaultBuckets)
      .def_property_readonly("buckets", &Statistics::buckets);

  m.attr("latent_dim") = kLatentDim;

  m.def(
      "canonical_sql", [](const Catalog& c, const std::string& sql) { return print_sql(parse_sql(sql, c), c); },
      py::arg("catalog"), py::arg("sql"));
  m.def(
      "default_plan",
      [](const Catalog& c, const Statistics& s, const std::string& sql) {
        const auto costed = optimize(parse_sql(sql, c), c, s);
        return py::make_tuple(costed.plan.to_text(c), costed.estimated_cost);
      },
      py::arg("catalog"), py::arg("stats"), py::arg("sql"), "Returns (plan text, estimated cost).");
  m.def(
      "enumerate_plans",
      [](const Catalog& c, const std::string& sql, std::uint64_t limit) {
        std::vector<std::string> texts;
        for (const auto& plan : enumerate_plans(parse_sql(sql, c), c, limit)) texts.push_back(plan.to_text(c));
        return texts;
      },
      py::arg("catalog"), py::arg("sql"), py::arg("limit") = 100000);
  m.def(
      "execute",
      [](const Catalog& c, const std::string& sql, const std::string& plan) {
        const auto q = parse_sql(sql, c);
        return execution_dict(execute_plan(parse_plan_text(plan, q, c), c));
      },
      py::arg("catalog"), py::arg("sql"), py::arg("plan"));
  m.def(
      "count_oracle", [](const Catalog& c, const std::string& sql) { return naive_count_oracle(parse_sql(sql, c), c); },
      py::arg("catalog"), py::arg("sql"));
  m.def(
      "headroom",
      [](const Catalog& c, const Statistics& s, const std::string& sql, const std::string& plan) {
        const auto q = parse_sql(sql, c);
        const auto r = headroom::headroom(q, parse_plan_text(plan, q, c), c, s);
        py::dict d;
        d["evaluable"] = r.evaluable;
        d["default_plan"] = r.default_plan;
        d["l_default"] = r.l_default;
        d["l_witness"] = r.l_witness;
        d["witness_timed_out"] = r.witness_timed_out;
        d["count"] = r.count;
        d["relative"] = r.relative;
        d["absolute"] = r.absolute;
        return d;
      },
      py::arg("catalog"), py::arg("stats"), py::arg("sql"), py::arg("plan"));
  m.def(
      "decode_latent",
      [](const Catalog& c, const std::vector<double>& z) {
        if (z.size() != kLatentDim) throw Error("argument", "latent vector must have " + std::to_string(kLatentDim) + " entries");
        const auto pair = decode_latent(z, c);
        return py::make_tuple(print_sql(pair.query, c), pair.plan.to_text(c));
      },
      py::arg("catalog"), py::arg("z"), "Returns (sql, plan text).");
  m.def(
      "encode_pair",
      [](const Catalog& c, const std::string& sql, const std::string& plan) {
        const auto q = parse_sql(sql, c);
        const auto z = encode_pair(q, parse_plan_text(plan, q, c), c);
        return std::vector<double>(z.begin(), z.end());
      },
      py::arg("catalog"), py::arg("sql"), py::arg("plan"));
  m.def(
      "run_search",
      [](const Catalog& c, const Statistics& s, const std::string& config_json) {
        const auto config = parse_run_config(config_json);
        std::vector<Observation> archive;
        {
          py::gil_scoped_release release;
          archive = run_search(c, s, config);
        }
        return archive_to_jsonl(archive);
      },
      py::arg("catalog"), py::arg("stats"), py::arg("config_json") = "{}",
      "Runs a search from a JSON run config and returns the archive as JSON lines.");
  m.def("expected_improvement", &expected_improvement, py::arg("mean"), py::arg("variance"), py::arg("best"));
  m.def("geometric_mean", &geometric_mean, py::arg("values"));
  m.def("median", &median, py::arg("values"));
}
