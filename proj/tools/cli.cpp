#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/graph.hpp"
#include "sqlfunc/harness.hpp"
#include "sqlfunc/parser.hpp"
#include "sqlfunc/resolve.hpp"
#include "sqlfunc/rules.hpp"

namespace {

using namespace sqlfunc;
using nlohmann::json;

// SQL arguments accept either a file path or literal SQL text.
std::string sql_arg(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return arg;
}

RuleSet rules_from_names(const std::vector<std::string>& names, int max_passes) {
  if (names.empty()) {
    RuleSet rs = RuleSet::default_set();
    rs.max_passes = max_passes;
    return rs;
  }
  RuleSet rs;
  rs.max_passes = max_passes;
  for (const std::string& n : names) {
    if (n == "constant_fold") rs.rules.push_back(RuleId::ConstantFold);
    else if (n == "predicate_pushdown") rs.rules.push_back(RuleId::PredicatePushdown);
    else if (n == "column_prune") rs.rules.push_back(RuleId::ColumnPrune);
    else if (n == "redundant_clause_elim") rs.rules.push_back(RuleId::RedundantClauseElim);
    else if (n == "operator_reorder") rs.rules.push_back(RuleId::OperatorReorder);
    else throw Error("unknown rule: " + n);
  }
  return rs;
}

FlowSet flows_from_string(const std::string& s) {
  FlowSet f{false, false};
  if (s == "none") return f;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "logic") f.logic = true;
    else if (part == "data") f.data = true;
    else throw Error("unknown flow kind: " + part);
  }
  return f;
}

Rot canonical_rot(const std::string& sql, const Schema& schema,
                  const RuleSet& rules) {
  SqlAst ast = parse_sql(sql);
  return canonicalize(lower_to_rot(resolve_names(ast, schema), schema), rules);
}

void apply_model_overrides(ModelConfig& m, const json& j) {
  if (j.contains("d_h")) m.d_h = j["d_h"].get<int>();
  if (j.contains("d_e")) m.d_e = j["d_e"].get<int>();
  if (j.contains("K")) m.K = j["K"].get<int>();
  if (j.contains("T")) m.T = j["T"].get<int>();
  if (j.contains("gamma")) m.gamma = j["gamma"].get<double>();
  if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("content_channels"))
    for (int i = 0; i < 4; ++i)
      m.content_channels[i] = j["content_channels"][i].get<int>();
  if (j.contains("pe_mode"))
    m.pe_mode = j["pe_mode"].get<std::string>() == "separate" ? PeMode::Separate
                                                              : PeMode::Global;
  if (j.contains("flows"))
    m.flows = flows_from_string(j["flows"].get<std::string>());
}

int run(int argc, char** argv) {
  CLI::App app{"Functional-equivalence scoring for SQL pairs"};
  app.require_subcommand(1);

  // ---- parse ----
  auto* cmd_parse = app.add_subcommand("parse", "Parse SQL and print the AST as JSON");
  std::string parse_sql_text, parse_dialect = "sqlite";
  cmd_parse->add_option("sql", parse_sql_text, "SQL text or file")->required();
  cmd_parse->add_option("--dialect", parse_dialect, "sqlite|generic");

  // ---- canon ----
  auto* cmd_canon = app.add_subcommand("canon", "Lower and canonicalize to an operator tree");
  std::string canon_sql, canon_schema, canon_format = "text";
  std::vector<std::string> canon_rules;
  int canon_passes = 10;
  cmd_canon->add_option("sql", canon_sql)->required();
  cmd_canon->add_option("--schema", canon_schema, "schema JSON file")->required();
  cmd_canon->add_option("--format", canon_format, "text|json");
  cmd_canon->add_option("--rules", canon_rules, "subset of rewrite rules");
  cmd_canon->add_option("--max-passes", canon_passes);

  // ---- graph ----
  auto* cmd_graph = app.add_subcommand("graph", "Emit the program graph (or a merged pair)");
  std::string graph_sql, graph_sql2, graph_schema, graph_format = "dot";
  std::string graph_flows = "logic,data";
  bool graph_emit_pe = false;
  int graph_K = 16;
  cmd_graph->add_option("sql", graph_sql)->required();
  cmd_graph->add_option("sql2", graph_sql2, "optional second query: merged pair");
  cmd_graph->add_option("--schema", graph_schema)->required();
  cmd_graph->add_option("--format", graph_format, "dot|json");
  cmd_graph->add_option("--flows", graph_flows, "logic,data or none");
  cmd_graph->add_flag("--emit-pe", graph_emit_pe, "print positional encodings instead");
  cmd_graph->add_option("--pe-steps", graph_K, "walk length for --emit-pe");

  // ---- relpm ----
  auto* cmd_relpm = app.add_subcommand("relpm", "Deterministic partial-match score");
  std::string relpm_ref, relpm_gen, relpm_schema;
  double relpm_alpha = 0.5, relpm_beta = 2.0;
  bool relpm_swap = false;
  cmd_relpm->add_option("ref", relpm_ref)->required();
  cmd_relpm->add_option("gen", relpm_gen)->required();
  cmd_relpm->add_option("--schema", relpm_schema)->required();
  cmd_relpm->add_option("--alpha", relpm_alpha);
  cmd_relpm->add_option("--beta", relpm_beta);
  cmd_relpm->add_flag("--swap-roles", relpm_swap);

  // ---- augment ----
  auto* cmd_augment = app.add_subcommand("augment", "Equivalence-rewriting pair generation");
  std::string aug_refs, aug_schemas, aug_out;
  std::uint64_t aug_seed = 1;
  cmd_augment->add_option("refs", aug_refs, "JSONL with {db_id, ref_sql}")->required();
  cmd_augment->add_option("--schemas", aug_schemas, "schema directory")->required();
  cmd_augment->add_option("--seed", aug_seed);
  cmd_augment->add_option("--out", aug_out, "output JSONL (default stdout)");

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "Train the graph matching network");
  std::string train_pairs, train_schemas, train_out = "model.fegmn";
  std::string train_config, train_pe, train_flows, train_optimizer;
  TrainConfig tc;
  int train_dh = 0, train_de = 0, train_K = 0, train_T = 0;
  cmd_train->add_option("pairs", train_pairs)->required();
  cmd_train->add_option("--schemas", train_schemas)->required();
  cmd_train->add_option("--out", train_out);
  cmd_train->add_option("--config", train_config, "JSON config file; flags override");
  cmd_train->add_option("--epochs", tc.epochs);
  cmd_train->add_option("--lr", tc.learning_rate);
  cmd_train->add_option("--batch", tc.batch_size);
  cmd_train->add_option("--gamma", tc.model.gamma);
  cmd_train->add_option("--seed", tc.seed);
  cmd_train->add_option("--optimizer", train_optimizer, "adam|sgd");
  cmd_train->add_option("--pe", train_pe, "separate|global");
  cmd_train->add_option("--flows", train_flows, "logic,data or none");
  cmd_train->add_option("--dh", train_dh);
  cmd_train->add_option("--de", train_de);
  cmd_train->add_option("--pe-steps", train_K);
  cmd_train->add_option("--prop-steps", train_T);

  // ---- score ----
  auto* cmd_score = app.add_subcommand("score", "Score one (reference, generated) pair");
  std::string score_ref, score_gen, score_schema, score_ckpt;
  double score_alpha = 0.5, score_beta = 2.0;
  cmd_score->add_option("ref", score_ref)->required();
  cmd_score->add_option("gen", score_gen)->required();
  cmd_score->add_option("--schema", score_schema)->required();
  cmd_score->add_option("--checkpoint", score_ckpt);
  cmd_score->add_option("--alpha", score_alpha);
  cmd_score->add_option("--beta", score_beta);

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "Score a dataset and report AUC / tau / rho");
  std::string eval_pairs, eval_schemas, eval_metric = "relpm", eval_ckpt;
  std::string eval_out, eval_csv;
  cmd_eval->add_option("pairs", eval_pairs)->required();
  cmd_eval->add_option("--schemas", eval_schemas)->required();
  cmd_eval->add_option("--metric", eval_metric, "gmn|relpm|astpm");
  cmd_eval->add_option("--checkpoint", eval_ckpt);
  cmd_eval->add_option("--out", eval_out, "metrics JSON file (default stdout)");
  cmd_eval->add_option("--csv", eval_csv, "per-pair scores CSV");

  CLI11_PARSE(app, argc, argv);

  if (cmd_parse->parsed()) {
    Dialect d = parse_dialect == "generic" ? Dialect::Generic : Dialect::Sqlite;
    SqlAst ast = parse_sql(sql_arg(parse_sql_text), d);
    std::cout << ast_to_json(ast.root, 2) << "\n";
    return 0;
  }

  if (cmd_canon->parsed()) {
    Schema schema = load_schema_file(canon_schema);
    Rot rot = canonical_rot(sql_arg(canon_sql), schema,
                            rules_from_names(canon_rules, canon_passes));
    if (canon_format == "json")
      std::cout << rot_to_json(rot, 2) << "\n";
    else
      std::cout << rot_to_text(rot);
    return 0;
  }

  if (cmd_graph->parsed()) {
    Schema schema = load_schema_file(graph_schema);
    FlowSet flows = flows_from_string(graph_flows);
    RuleSet rules = RuleSet::default_set();
    Rot r1 = canonical_rot(sql_arg(graph_sql), schema, rules);
    ProgramGraph g1 = build_program_graph(r1, flows);
    if (graph_sql2.empty()) {
      if (graph_emit_pe) {
        Mat pe = rwpe_encode(g1, graph_K);
        json j = json::array();
        for (int i = 0; i < pe.rows; ++i) {
          json row = json::array();
          for (int k = 0; k < pe.cols; ++k) row.push_back(pe.at(i, k));
          j.push_back(std::move(row));
        }
        std::cout << j.dump() << "\n";
      } else if (graph_format == "json") {
        std::cout << export_graph_json(g1, 2) << "\n";
      } else {
        std::cout << export_graph_dot(g1);
      }
      return 0;
    }
    Rot r2 = canonical_rot(sql_arg(graph_sql2), schema, rules);
    ProgramGraph g2 = build_program_graph(r2, flows);
    MergedGraph merged = merge_graph_pair(g1, g2, find_seed_pairs(r1, r2));
    if (graph_emit_pe) {
      auto [pe1, pe2] = global_rwpe_encode(merged, graph_K);
      json j;
      auto dump = [](const Mat& m) {
        json rows = json::array();
        for (int i = 0; i < m.rows; ++i) {
          json row = json::array();
          for (int k = 0; k < m.cols; ++k) row.push_back(m.at(i, k));
          rows.push_back(std::move(row));
        }
        return rows;
      };
      j["left"] = dump(pe1);
      j["right"] = dump(pe2);
      std::cout << j.dump() << "\n";
    } else if (graph_format == "json") {
      std::cout << export_merged_json(merged, nullptr, 2) << "\n";
    } else {
      std::cout << export_merged_dot(merged);
    }
    return 0;
  }

  if (cmd_relpm->parsed()) {
    Schema schema = load_schema_file(relpm_schema);
    RuleSet rules = RuleSet::default_set();
    Rot gen = canonical_rot(sql_arg(relpm_gen), schema, rules);
    Rot ref = canonical_rot(sql_arg(relpm_ref), schema, rules);
    MatchConfig cfg;
    cfg.alpha = relpm_alpha;
    cfg.beta = relpm_beta;
    cfg.swap_roles = relpm_swap;
    MatchResult r = relpm_score(gen, ref, cfg);
    json j = {{"precision", r.precision},
              {"recall", r.recall},
              {"f_beta", r.f_beta}};
    std::cout << j.dump() << "\n";
    return 0;
  }

  if (cmd_augment->parsed()) {
    std::ifstream in(aug_refs);
    if (!in) throw FormatError(0, "cannot open " + aug_refs);
    std::vector<RefQuery> refs;
    std::map<std::string, Schema> schemas;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw FormatError(lineno, e.what());
      }
      RefQuery r;
      r.db_id = j.at("db_id").get<std::string>();
      r.sql = j.contains("ref_sql") ? j["ref_sql"].get<std::string>()
                                    : j.at("sql").get<std::string>();
      if (!schemas.count(r.db_id))
        schemas.emplace(r.db_id,
                        load_schema_file(aug_schemas + "/" + r.db_id + ".json"));
      refs.push_back(std::move(r));
    }
    std::vector<PairExample> pairs =
        generate_augmented_pairs(refs, schemas, aug_seed);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!aug_out.empty()) {
      file.open(aug_out);
      out = &file;
    }
    for (const PairExample& ex : pairs) {
      json j = {{"id", ex.id},
                {"db_id", ex.db_id},
                {"ref_sql", ex.ref_sql},
                {"gen_sql", ex.gen_sql},
                {"label", ex.label}};
      (*out) << j.dump() << "\n";
    }
    return 0;
  }

  if (cmd_train->parsed()) {
    if (!train_config.empty()) {
      std::ifstream cf(train_config);
      if (!cf) throw FormatError(0, "cannot open " + train_config);
      json j = json::parse(cf);
      if (j.contains("learning_rate")) tc.learning_rate = j["learning_rate"];
      if (j.contains("epochs")) tc.epochs = j["epochs"];
      if (j.contains("batch_size")) tc.batch_size = j["batch_size"];
      if (j.contains("seed")) tc.seed = j["seed"];
      if (j.contains("optimizer"))
        tc.optimizer = j["optimizer"] == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
      if (j.contains("model")) apply_model_overrides(tc.model, j["model"]);
    }
    if (!train_optimizer.empty())
      tc.optimizer = train_optimizer == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
    if (!train_pe.empty())
      tc.model.pe_mode =
          train_pe == "separate" ? PeMode::Separate : PeMode::Global;
    if (!train_flows.empty()) tc.model.flows = flows_from_string(train_flows);
    if (train_dh > 0) tc.model.d_h = train_dh;
    if (train_de > 0) tc.model.d_e = train_de;
    if (train_K > 0) tc.model.K = train_K;
    if (train_T > 0) tc.model.T = train_T;
    tc.model.seed = tc.seed;
    tc.out_path = train_out;
    std::vector<PairExample> pairs = load_pairs(train_pairs);
    std::map<std::string, Schema> schemas = load_schemas_for(pairs, train_schemas);
    TrainResult result = train(pairs, schemas, tc);
    json j = {{"checkpoint", result.checkpoint_path},
              {"best_val_auc", result.best_val_auc},
              {"n_train", result.n_train},
              {"n_val", result.n_val},
              {"n_excluded", result.n_excluded},
              {"final_loss",
               result.trace.empty() ? 0.0 : result.trace.back().train_loss}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  if (cmd_score->parsed()) {
    Schema schema = load_schema_file(score_schema);
    GmnParams params;
    const GmnParams* pp = nullptr;
    if (!score_ckpt.empty()) {
      params = load_checkpoint(score_ckpt);
      pp = &params;
    }
    MatchConfig mc;
    mc.alpha = score_alpha;
    mc.beta = score_beta;
    std::cout << score_report_json(
                     score_pair(sql_arg(score_ref), sql_arg(score_gen), schema,
                                pp, mc),
                     -1)
              << "\n";
    return 0;
  }

  if (cmd_eval->parsed()) {
    std::vector<PairExample> pairs = load_pairs(eval_pairs);
    std::map<std::string, Schema> schemas = load_schemas_for(pairs, eval_schemas);
    EvalMetric metric = EvalMetric::Relpm;
    if (eval_metric == "gmn") metric = EvalMetric::Gmn;
    else if (eval_metric == "astpm") metric = EvalMetric::Astpm;
    else if (eval_metric != "relpm") throw Error("unknown metric " + eval_metric);
    GmnParams params;
    const GmnParams* pp = nullptr;
    if (!eval_ckpt.empty()) {
      params = load_checkpoint(eval_ckpt);
      pp = &params;
    }
    EvalResult result = evaluate(pairs, schemas, metric, pp);
    json j = {{"auc", result.metrics.auc},
              {"kendall_tau", result.metrics.kendall_tau},
              {"spearman", result.metrics.spearman},
              {"n_scored", result.metrics.n_scored},
              {"n_unparseable", result.metrics.n_unparseable}};
    if (eval_out.empty()) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::ofstream of(eval_out);
      of << j.dump(2) << "\n";
      std::cout << "wrote " << eval_out << "\n";
    }
    if (!eval_csv.empty()) {
      std::ofstream cf(eval_csv);
      cf << "id,score,label,unparseable\n";
      for (const EvalRow& row : result.rows)
        cf << row.id << "," << row.score << "," << row.label << ","
           << (row.unparseable ? 1 : 0) << "\n";
    }
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sqlfunc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
