#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqlfunc/gmn.hpp"
#include "sqlfunc/metrics.hpp"
#include "sqlfunc/relpm.hpp"
#include "sqlfunc/schema.hpp"

namespace sqlfunc {

struct PairExample {
  std::string id;
  std::string db_id;
  std::string ref_sql;
  std::string gen_sql;
  int label = 0;  // functional correctness of gen_sql, 0 or 1
  std::string prompt;  // carried along, ignored by scoring
};

/// On-disk field names for the pairs JSONL; remappable because released
/// datasets differ in their layouts.
struct FieldMap {
  std::string id = "id";
  std::string db_id = "db_id";
  std::string ref_sql = "ref_sql";
  std::string gen_sql = "gen_sql";
  std::string label = "label";
  std::string prompt = "prompt";
};

std::vector<PairExample> load_pairs(const std::string& path,
                                    const FieldMap& map = {});

/// Loads `<schema_dir>/<db_id>.json` for every db_id in `pairs`.
/// Throws MissingSchema.
std::map<std::string, Schema> load_schemas_for(
    const std::vector<PairExample>& pairs, const std::string& schema_dir);

// -- augmentation ------------------------------------------------------------

struct RefQuery {
  std::string db_id;
  std::string sql;
};

/// Positive partners via semantics-preserving rewrites, negative partners
/// via small mutations; deterministic under `seed`. Queries lacking an
/// applicable rewrite are skipped. Pair ids end in ":<rule>".
std::vector<PairExample> generate_augmented_pairs(
    const std::vector<RefQuery>& corpus,
    const std::map<std::string, Schema>& schemas, std::uint64_t seed);

/// Rules whose output is NOT expected to canonicalize structurally equal
/// (the learned metric must bridge them).
bool augment_rule_is_hard(const std::string& rule);
std::string augment_rule_of(const PairExample& ex);

// -- training ----------------------------------------------------------------

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::Adam;
  ModelConfig model;  // gamma, pe_mode and flows live here
  std::string out_path = "model.fegmn";
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
};

struct TrainResult {
  std::string checkpoint_path;
  std::vector<EpochStats> trace;
  double best_val_auc = 0.0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_excluded = 0;  // unparseable examples
};

/// Mini-batch margin-loss training; 10% of pairs (by id hash) become the
/// validation split; the checkpoint with the best validation AUC is kept.
/// Throws DivergenceError if the loss stops being finite.
TrainResult train(const std::vector<PairExample>& data,
                  const std::map<std::string, Schema>& schemas,
                  const TrainConfig& cfg);

// -- scoring -----------------------------------------------------------------

struct ScoreReport {
  double relpm_precision = 0.0;
  double relpm_recall = 0.0;
  double relpm_f = 0.0;
  double astpm_f = 0.0;
  bool unparseable = false;
  std::optional<double> gmn_raw;
  std::optional<double> gmn_normalized;
};

/// Full metric stack over one pair. Parse errors in ref_sql propagate;
/// unparseable gen_sql yields zero scores with the flag set. `params`
/// enables the learned metric.
ScoreReport score_pair(const std::string& ref_sql, const std::string& gen_sql,
                       const Schema& schema, const GmnParams* params,
                       const MatchConfig& match_cfg = {});

std::string score_report_json(const ScoreReport& r, int indent = -1);

// -- evaluation --------------------------------------------------------------

enum class EvalMetric { Gmn, Relpm, Astpm };

struct EvalRow {
  std::string id;
  double score = 0.0;
  int label = 0;
  bool unparseable = false;
};

struct EvalResult {
  MetricsReport metrics;
  std::vector<EvalRow> rows;
};

/// Scores every pair (in parallel, capped by SQLFUNC_THREADS) and computes
/// the correlation metrics over the parseable subset.
EvalResult evaluate(const std::vector<PairExample>& pairs,
                    const std::map<std::string, Schema>& schemas,
                    EvalMetric metric, const GmnParams* params);

}  // namespace sqlfunc
