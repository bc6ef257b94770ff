#include <algorithm>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/graph.hpp"
#include "sqlfunc/harness.hpp"
#include "sqlfunc/parser.hpp"
#include "sqlfunc/resolve.hpp"
#include "sqlfunc/rules.hpp"

namespace sqlfunc {

namespace {

struct LoweredQuery {
  SqlAst ast;
  Rot canonical;
};

LoweredQuery lower_query(const std::string& sql, const Schema& schema) {
  LoweredQuery q;
  q.ast = parse_sql(sql);
  SqlAst resolved = resolve_names(q.ast, schema);
  q.canonical = canonicalize(lower_to_rot(resolved, schema));
  return q;
}

double gmn_distance(const Rot& a, const Rot& b, const GmnParams& params) {
  ProgramGraph g1 = build_program_graph(a, params.config.flows);
  ProgramGraph g2 = build_program_graph(b, params.config.flows);
  MergedGraph merged = merge_graph_pair(g1, g2, find_seed_pairs(a, b));
  return pair_score(merged, params).distance;
}

}  // namespace

ScoreReport score_pair(const std::string& ref_sql, const std::string& gen_sql,
                       const Schema& schema, const GmnParams* params,
                       const MatchConfig& match_cfg) {
  ScoreReport report;
  LoweredQuery ref = lower_query(ref_sql, schema);  // ref errors propagate
  LoweredQuery gen;
  try {
    gen = lower_query(gen_sql, schema);
  } catch (const Error&) {
    report.unparseable = true;
    if (params) {
      report.gmn_raw = std::nullopt;
      report.gmn_normalized = 0.0;
    }
    return report;
  }
  MatchResult relpm = relpm_score(gen.canonical, ref.canonical, match_cfg);
  report.relpm_precision = relpm.precision;
  report.relpm_recall = relpm.recall;
  report.relpm_f = relpm.f_beta;
  report.astpm_f = astpm_score(gen.ast, ref.ast, match_cfg).f_beta;
  if (params) {
    double s = gmn_distance(ref.canonical, gen.canonical, *params);
    report.gmn_raw = -s;
    report.gmn_normalized = normalize_score(-s);
  }
  return report;
}

std::string score_report_json(const ScoreReport& r, int indent) {
  nlohmann::json j;
  j["relpm"] = {{"precision", r.relpm_precision},
                {"recall", r.relpm_recall},
                {"f_beta", r.relpm_f}};
  j["astpm"] = r.astpm_f;
  if (r.unparseable) j["unparseable"] = true;
  if (r.gmn_raw) j["gmn_raw"] = *r.gmn_raw;
  if (r.gmn_normalized) j["gmn_normalized"] = *r.gmn_normalized;
  else if (r.unparseable) j["gmn_normalized"] = 0.0;
  return j.dump(indent);
}

EvalResult evaluate(const std::vector<PairExample>& pairs,
                    const std::map<std::string, Schema>& schemas,
                    EvalMetric metric, const GmnParams* params) {
  if (metric == EvalMetric::Gmn && !params)
    throw Error("the learned metric needs a checkpoint");
  EvalResult result;
  result.rows.resize(pairs.size());

  unsigned threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  if (const char* env = std::getenv("SQLFUNC_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) threads = std::min<unsigned>(threads, cap);
  }
  threads = std::min<unsigned>(threads, pairs.size() ? pairs.size() : 1);

  auto worker = [&](unsigned start) {
    for (std::size_t i = start; i < pairs.size(); i += threads) {
      const PairExample& ex = pairs[i];
      EvalRow row;
      row.id = ex.id;
      row.label = ex.label;
      try {
        const Schema& schema = schemas.at(ex.db_id);
        ScoreReport rep =
            score_pair(ex.ref_sql, ex.gen_sql, schema, params, MatchConfig{});
        if (rep.unparseable) {
          row.unparseable = true;
          row.score = 0.0;
        } else {
          switch (metric) {
            case EvalMetric::Gmn: row.score = *rep.gmn_normalized; break;
            case EvalMetric::Relpm: row.score = rep.relpm_f; break;
            case EvalMetric::Astpm: row.score = rep.astpm_f; break;
          }
        }
      } catch (const Error&) {
        row.unparseable = true;  // reference side failed to parse
        row.score = 0.0;
      }
      result.rows[i] = std::move(row);
    }
  };

  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (std::thread& t : pool) t.join();
  }

  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t unparseable = 0;
  for (const EvalRow& row : result.rows) {
    if (row.unparseable) {
      ++unparseable;
      continue;
    }
    scores.push_back(row.score);
    labels.push_back(row.label);
  }
  result.metrics = compute_metrics(scores, labels);
  result.metrics.n_unparseable = unparseable;
  return result;
}

}  // namespace sqlfunc
