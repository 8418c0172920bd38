#include "propdb/error.hpp"
#include "propdb/executor.hpp"
#include "propdb/metrics.hpp"
#include "propdb/model.hpp"
#include "propdb/oracle.hpp"
#include "propdb/planner.hpp"
#include "propdb/query.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace propdb;

namespace {

py::dict to_dict(const AnswerTable& t) {
    py::dict out;
    for (const auto& [key, p] : t.rows) {
        py::tuple k(key.size());
        for (std::size_t i = 0; i < key.size(); ++i)
            k[i] = std::visit([](const auto& v) { return py::cast(v); }, key[i]);
        out[k] = p;
    }
    return out;
}

Query bound(const std::string& text, const Database& db) { return parse_query(text, &db); }

std::vector<std::string> texts(const std::vector<Plan>& plans) {
    std::vector<std::string> out;
    for (const auto& p : plans) out.push_back(p->text);
    return out;
}

}

PYBIND11_MODULE(_propdb, m) {
    m.doc() = "Probabilistic database query evaluation";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<DataError>(m, "DataError", base);
    py::register_exception<QueryError>(m, "QueryError", base);
    py::register_exception<UsageError>(m, "UsageError", base);
    py::register_exception<OracleInfeasible>(m, "OracleInfeasible", base);

    py::class_<Database>(m, "Database")
        .def_property_readonly("tuple_count", &Database::tuple_count)
        .def_property_readonly("relations", [](const Database& db) {
            std::vector<std::string> names;
            for (const auto& [name, _] : db.relations()) names.push_back(name);
            return names;
        });

    m.def("load", &load_database_files, py::arg("schema"), py::arg("data_dir"),
          "Load a schema file and a directory of <relation>.tsv files.");
    m.def("loads",
          [](const std::string& schema, const std::map<std::string, std::string>& tables) {
              std::map<std::string, std::string, std::less<>> t(tables.begin(), tables.end());
              return load_database(schema, t);
          },
          py::arg("schema"), py::arg("tables") = std::map<std::string, std::string>{});

    m.def("parse", [](const std::string& text) { return parse_query(text).to_string(); }, py::arg("query"),
          "Parse a query and return its normalized text.");
    m.def("is_hierarchical", [](const std::string& text) { return is_hierarchical(parse_query(text)); },
          py::arg("query"));

    m.def("plans",
          [](const std::string& text, const Database* db) {
              if (!db) return texts(enumerate_minimal_plans(parse_query(text)));
              return texts(enumerate_plans_fd(bound(text, *db), *db));
          },
          py::arg("query"), py::arg("db") = nullptr,
          "Minimal plans; with a database, deterministic tables and FDs prune the set.");
    m.def("safe_plan",
          [](const std::string& text) -> std::optional<std::string> {
              auto p = propdb::safe_plan(parse_query(text));
              if (!p) return std::nullopt;
              return (*p)->text;
          },
          py::arg("query"));

    m.def("propagation",
          [](const std::string& text, const Database& db, const std::string& opt) {
              return to_dict(propagation_score(bound(text, db), db, parse_pipeline(opt)));
          },
          py::arg("query"), py::arg("db"), py::arg("opt") = "none");
    m.def("exact",
          [](const std::string& text, const Database& db, int var_limit) {
              return to_dict(exact_answers(bound(text, db), db, var_limit));
          },
          py::arg("query"), py::arg("db"), py::arg("var_limit") = kDefaultVarLimit);
    m.def("mc",
          [](const std::string& text, const Database& db, std::uint64_t samples, std::uint64_t seed) {
              return to_dict(mc_answers(bound(text, db), db, samples, seed));
          },
          py::arg("query"), py::arg("db"), py::arg("samples") = 10000, py::arg("seed") = 0);
}
