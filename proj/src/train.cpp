#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "model_internal.hpp"
#include "sqlfunc/errors.hpp"
#include "sqlfunc/graph.hpp"
#include "sqlfunc/harness.hpp"
#include "sqlfunc/parser.hpp"
#include "sqlfunc/resolve.hpp"
#include "sqlfunc/rules.hpp"

namespace sqlfunc {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct PreparedPair {
  std::string id;
  MergedGraph merged;
  Mat pe1, pe2;
  int t = 1;  // training label in {-1, +1}
};

struct AdamState {
  std::map<std::string, Mat> m, v;
  long long step = 0;
};

double forward_distance(const PreparedPair& pp, const GmnParams& params) {
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  ForwardNodes fwd =
      build_pair_forward_pe(tape, tp, pp.merged, params, pp.pe1, pp.pe2);
  return tape.val(fwd.distance).at(0, 0);
}

double validation_auc(const std::vector<PreparedPair>& val,
                      const GmnParams& params) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const PreparedPair& pp : val) {
    scores.push_back(-forward_distance(pp, params));
    labels.push_back(pp.t > 0 ? 1 : 0);
  }
  try {
    return compute_metrics(scores, labels).auc;
  } catch (const DegenerateLabels&) {
    return 0.0;
  }
}

}  // namespace

TrainResult train(const std::vector<PairExample>& data,
                  const std::map<std::string, Schema>& schemas,
                  const TrainConfig& cfg) {
  if (data.empty()) throw Error("empty training set");
  cfg.model.validate();

  // Lower every pair once; graphs, seeds and positional encodings are
  // fixed for the whole run. Unparseable examples are excluded.
  std::vector<PreparedPair> train_set, val_set;
  std::size_t excluded = 0;
  std::vector<std::string> train_ids, val_ids;
  for (const PairExample& ex : data) {
    auto sit = schemas.find(ex.db_id);
    if (sit == schemas.end()) throw MissingSchema(ex.db_id);
    const Schema& schema = sit->second;
    PreparedPair pp;
    try {
      SqlAst ref_ast = parse_sql(ex.ref_sql);
      Rot ref = canonicalize(lower_to_rot(resolve_names(ref_ast, schema), schema));
      SqlAst gen_ast = parse_sql(ex.gen_sql);
      Rot gen = canonicalize(lower_to_rot(resolve_names(gen_ast, schema), schema));
      ProgramGraph g1 = build_program_graph(ref, cfg.model.flows);
      ProgramGraph g2 = build_program_graph(gen, cfg.model.flows);
      pp.merged = merge_graph_pair(g1, g2, find_seed_pairs(ref, gen));
      auto pe = pair_positional(pp.merged, cfg.model);
      pp.pe1 = std::move(pe.first);
      pp.pe2 = std::move(pe.second);
    } catch (const Error&) {
      ++excluded;
      continue;
    }
    pp.id = ex.id;
    pp.t = 2 * ex.label - 1;
    if (fnv1a(ex.id) % 10 == 0) {
      val_ids.push_back(ex.id);
      val_set.push_back(std::move(pp));
    } else {
      train_ids.push_back(ex.id);
      train_set.push_back(std::move(pp));
    }
  }
  if (train_set.empty()) throw Error("no trainable pairs after exclusions");

  GmnParams params = GmnParams::init(cfg.model);
  AdamState adam;
  for (const auto& [name, mat] : params.tensors) {
    adam.m.emplace(name, Mat(mat.rows, mat.cols));
    adam.v.emplace(name, Mat(mat.rows, mat.cols));
  }

  TrainResult result;
  result.n_train = train_set.size();
  result.n_val = val_set.size();
  result.n_excluded = excluded;
  result.best_val_auc = -1.0;
  result.checkpoint_path = cfg.out_path;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // deterministic shuffle per epoch
    Rng shuffle_rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(static_cast<int>(i))]);

    double epoch_loss = 0.0;
    std::size_t batch_start = 0;
    while (batch_start < order.size()) {
      const std::size_t batch_end =
          std::min(batch_start + static_cast<std::size_t>(cfg.batch_size),
                   order.size());
      std::map<std::string, Mat> grad_sum;
      for (std::size_t k = batch_start; k < batch_end; ++k) {
        const PreparedPair& pp = train_set[order[k]];
        PairGradients pg =
            pair_loss_gradients(pp.merged, params, pp.t, cfg.model.gamma);
        if (!std::isfinite(pg.loss))
          throw DivergenceError("non-finite loss at epoch " +
                                std::to_string(epoch));
        epoch_loss += pg.loss;
        for (auto& [name, g] : pg.grads) {
          auto it = grad_sum.find(name);
          if (it == grad_sum.end()) {
            grad_sum.emplace(name, std::move(g));
          } else {
            for (std::size_t i = 0; i < g.size(); ++i) it->second.d[i] += g.d[i];
          }
        }
      }
      const double scale = 1.0 / static_cast<double>(batch_end - batch_start);
      adam.step += 1;
      for (auto& [name, mat] : params.tensors) {
        Mat& g = grad_sum.at(name);
        if (cfg.optimizer == Optimizer::Sgd) {
          for (std::size_t i = 0; i < mat.size(); ++i)
            mat.d[i] -= cfg.learning_rate * scale * g.d[i];
          continue;
        }
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        Mat& m = adam.m.at(name);
        Mat& v = adam.v.at(name);
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
        for (std::size_t i = 0; i < mat.size(); ++i) {
          const double gi = scale * g.d[i];
          m.d[i] = b1 * m.d[i] + (1.0 - b1) * gi;
          v.d[i] = b2 * v.d[i] + (1.0 - b2) * gi * gi;
          const double mhat = m.d[i] / bc1;
          const double vhat = v.d[i] / bc2;
          mat.d[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + eps);
        }
      }
      batch_start = batch_end;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
    stats.val_auc = val_set.empty() ? 0.0 : validation_auc(val_set, params);
    result.trace.push_back(stats);
    if (!std::isfinite(stats.train_loss))
      throw DivergenceError("non-finite epoch loss");

    if (val_set.empty() || stats.val_auc >= result.best_val_auc) {
      result.best_val_auc = val_set.empty() ? 0.0 : stats.val_auc;
      save_checkpoint(params, cfg.out_path);
    }
  }

  // run manifest: configuration, split and loss trace
  nlohmann::json manifest;
  manifest["seed"] = cfg.seed;
  manifest["learning_rate"] = cfg.learning_rate;
  manifest["epochs"] = cfg.epochs;
  manifest["batch_size"] = cfg.batch_size;
  manifest["optimizer"] = cfg.optimizer == Optimizer::Adam ? "adam" : "sgd";
  manifest["gamma"] = cfg.model.gamma;
  manifest["n_train"] = result.n_train;
  manifest["n_val"] = result.n_val;
  manifest["n_excluded"] = result.n_excluded;
  manifest["val_ids"] = val_ids;
  nlohmann::json trace = nlohmann::json::array();
  for (const EpochStats& s : result.trace)
    trace.push_back({{"epoch", s.epoch},
                     {"train_loss", s.train_loss},
                     {"val_auc", s.val_auc}});
  manifest["trace"] = std::move(trace);
  std::ofstream mf(cfg.out_path + ".manifest.json");
  mf << manifest.dump(2) << "\n";

  return result;
}

}  // namespace sqlfunc
