#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/graph.hpp"
#include "sqlfunc/harness.hpp"
#include "sqlfunc/parser.hpp"
#include "sqlfunc/resolve.hpp"
#include "sqlfunc/rules.hpp"

namespace py = pybind11;
using namespace sqlfunc;

namespace {

Rot canonical_rot(const std::string& sql, const Schema& schema) {
  SqlAst ast = parse_sql(sql);
  return canonicalize(lower_to_rot(resolve_names(ast, schema), schema));
}

FlowSet parse_flows(const std::string& s) {
  FlowSet f{false, false};
  if (s.find("logic") != std::string::npos) f.logic = true;
  if (s.find("data") != std::string::npos) f.data = true;
  return f;
}

py::dict match_to_dict(const MatchResult& r) {
  py::dict d;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f_beta"] = r.f_beta;
  return d;
}

}  // namespace

PYBIND11_MODULE(sqlfunc, m) {
  m.doc() = "Functional-equivalence scoring for SQL pairs";

  py::register_exception<Error>(m, "SqlfuncError");

  m.def(
      "parse",
      [](const std::string& sql, const std::string& dialect) {
        Dialect d = dialect == "generic" ? Dialect::Generic : Dialect::Sqlite;
        return ast_to_json(parse_sql(sql, d).root, -1);
      },
      py::arg("sql"), py::arg("dialect") = "sqlite",
      "Parse SQL; returns the AST as a JSON string.");

  m.def(
      "render",
      [](const std::string& sql) { return render_sql(parse_sql(sql).root); },
      py::arg("sql"), "Parse and re-render SQL deterministically.");

  m.def(
      "canon",
      [](const std::string& sql, const std::string& schema_json,
         const std::string& format) {
        Schema schema = schema_from_json(schema_json);
        Rot rot = canonical_rot(sql, schema);
        return format == "text" ? rot_to_text(rot) : rot_to_json(rot, -1);
      },
      py::arg("sql"), py::arg("schema_json"), py::arg("format") = "json",
      "Canonicalized operator tree (JSON or indented text).");

  m.def(
      "relpm",
      [](const std::string& ref, const std::string& gen,
         const std::string& schema_json, double alpha, double beta) {
        Schema schema = schema_from_json(schema_json);
        MatchConfig cfg;
        cfg.alpha = alpha;
        cfg.beta = beta;
        return match_to_dict(
            relpm_score(canonical_rot(gen, schema), canonical_rot(ref, schema),
                        cfg));
      },
      py::arg("ref_sql"), py::arg("gen_sql"), py::arg("schema_json"),
      py::arg("alpha") = 0.5, py::arg("beta") = 2.0);

  m.def(
      "astpm",
      [](const std::string& ref, const std::string& gen, double alpha,
         double beta) {
        MatchConfig cfg;
        cfg.alpha = alpha;
        cfg.beta = beta;
        return match_to_dict(astpm_score(parse_sql(gen), parse_sql(ref), cfg));
      },
      py::arg("ref_sql"), py::arg("gen_sql"), py::arg("alpha") = 0.5,
      py::arg("beta") = 2.0);

  m.def(
      "score",
      [](const std::string& ref, const std::string& gen,
         const std::string& schema_json, const std::string& checkpoint) {
        Schema schema = schema_from_json(schema_json);
        GmnParams params;
        const GmnParams* pp = nullptr;
        if (!checkpoint.empty()) {
          params = load_checkpoint(checkpoint);
          pp = &params;
        }
        return score_report_json(score_pair(ref, gen, schema, pp), -1);
      },
      py::arg("ref_sql"), py::arg("gen_sql"), py::arg("schema_json"),
      py::arg("checkpoint") = "",
      "Full metric stack for one pair; returns a JSON string.");

  m.def(
      "graph",
      [](const std::string& sql, const std::string& schema_json,
         const std::string& flows, const std::string& format) {
        Schema schema = schema_from_json(schema_json);
        ProgramGraph g =
            build_program_graph(canonical_rot(sql, schema), parse_flows(flows));
        return format == "dot" ? export_graph_dot(g) : export_graph_json(g, -1);
      },
      py::arg("sql"), py::arg("schema_json"), py::arg("flows") = "logic,data",
      py::arg("format") = "json");

  m.def(
      "merged_graph",
      [](const std::string& sql1, const std::string& sql2,
         const std::string& schema_json, const std::string& flows,
         const std::string& format) {
        Schema schema = schema_from_json(schema_json);
        Rot r1 = canonical_rot(sql1, schema);
        Rot r2 = canonical_rot(sql2, schema);
        FlowSet f = parse_flows(flows);
        MergedGraph merged =
            merge_graph_pair(build_program_graph(r1, f),
                             build_program_graph(r2, f), find_seed_pairs(r1, r2));
        return format == "dot" ? export_merged_dot(merged)
                               : export_merged_json(merged, nullptr, -1);
      },
      py::arg("sql1"), py::arg("sql2"), py::arg("schema_json"),
      py::arg("flows") = "logic,data", py::arg("format") = "json");

  m.def("normalize_score", &normalize_score, py::arg("raw"));

  m.def(
      "compute_metrics",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        MetricsReport r = compute_metrics(scores, labels);
        py::dict d;
        d["auc"] = r.auc;
        d["kendall_tau"] = r.kendall_tau;
        d["spearman"] = r.spearman;
        d["n_scored"] = r.n_scored;
        return d;
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "augment",
      [](const std::vector<std::pair<std::string, std::string>>& refs,
         const std::map<std::string, std::string>& schema_jsons,
         std::uint64_t seed) {
        std::vector<RefQuery> corpus;
        for (const auto& [db, sql] : refs) corpus.push_back({db, sql});
        std::map<std::string, Schema> schemas;
        for (const auto& [db, text] : schema_jsons)
          schemas.emplace(db, schema_from_json(text));
        py::list out;
        for (const PairExample& ex :
             generate_augmented_pairs(corpus, schemas, seed)) {
          py::dict d;
          d["id"] = ex.id;
          d["db_id"] = ex.db_id;
          d["ref_sql"] = ex.ref_sql;
          d["gen_sql"] = ex.gen_sql;
          d["label"] = ex.label;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("refs"), py::arg("schema_jsons"), py::arg("seed") = 1,
      "refs: list of (db_id, sql); schema_jsons: db_id -> schema JSON text.");
}
