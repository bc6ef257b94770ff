#include "sqlfunc/gmn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "model_internal.hpp"
#include "sqlfunc/features.hpp"
#include "sqlfunc/relpm.hpp"

namespace sqlfunc {

void ModelConfig::validate() const {
  if (d_h < 1 || d_e < 1 || K < 1 || T < 1)
    throw Error("model dimensions must be positive");
  if (!(gamma > 0.0)) throw Error("margin gamma must be positive");
  for (int c : content_channels)
    if (c < 1) throw Error("content channels must be positive");
}

Mat& GmnParams::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw Error("unknown tensor: " + name);
  return it->second;
}

const Mat& GmnParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw Error("unknown tensor: " + name);
  return it->second;
}

namespace {

struct TensorSpec {
  std::string name;
  int rows, cols, fan_in;
};

std::vector<TensorSpec> tensor_specs(const ModelConfig& cfg) {
  std::vector<TensorSpec> specs;
  const int dh = cfg.d_h, de = cfg.d_e, K = cfg.K;
  const int k = cfg.content_kernel;
  specs.push_back({"opcode_table", kOpcodeSlots, dh, dh});
  specs.push_back({"edge_table", 3, de, de});
  int cin = kAsciiDim;
  for (int s = 1; s <= 4; ++s) {
    const int cout = cfg.content_channels[s - 1];
    for (int b = 0; b < cfg.content_blocks_per_stage; ++b) {
      const std::string pre =
          "content_net.stage" + std::to_string(s) + ".block" + std::to_string(b);
      const int c0_in = b == 0 ? cin : cout;
      specs.push_back({pre + ".conv0.weight", cout, k * c0_in, k * c0_in});
      specs.push_back({pre + ".conv0.bias", 1, cout, k * c0_in});
      specs.push_back({pre + ".conv1.weight", cout, k * cout, k * cout});
      specs.push_back({pre + ".conv1.bias", 1, cout, k * cout});
      if (b == 0) {  // stride-2 entry needs a projected skip
        specs.push_back({pre + ".proj.weight", cout, cin, cin});
        specs.push_back({pre + ".proj.bias", 1, cout, cin});
      }
    }
    cin = cout;
  }
  specs.push_back({"content_net.head.weight", cin, dh, cin});
  specs.push_back({"content_net.head.bias", 1, dh, cin});

  auto mlp = [&](const std::string& pre, int in, int hidden, int out) {
    specs.push_back({pre + ".l0.weight", in, hidden, in});
    specs.push_back({pre + ".l0.bias", 1, hidden, in});
    specs.push_back({pre + ".l1.weight", hidden, out, hidden});
    specs.push_back({pre + ".l1.bias", 1, out, hidden});
  };
  mlp("fusion", dh + K, dh, dh);
  mlp("inner", 2 * dh + de, dh, dh);
  const int gin = 2 * dh;  // GRU input: m concat mu
  for (const char* gate : {"z", "r", "n"}) {
    specs.push_back({std::string("gru.w") + gate, gin, dh, gin});
    specs.push_back({std::string("gru.u") + gate, dh, dh, dh});
    specs.push_back({std::string("gru.b") + gate, 1, dh, gin});
  }
  specs.push_back({"pos.w", K, K, K});
  specs.push_back({"pos.u", K, K, K});
  mlp("agg.gate", dh, dh, dh);
  mlp("agg.transform", dh, dh, dh);
  mlp("agg.out", dh, dh, dh);
  return specs;
}

}  // namespace

GmnParams GmnParams::init(const ModelConfig& cfg) {
  cfg.validate();
  GmnParams p;
  p.config = cfg;
  Rng rng(cfg.seed);
  for (const TensorSpec& s : tensor_specs(cfg)) {
    Mat m(s.rows, s.cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.fan_in));
    for (double& v : m.d) v = rng.uniform(-bound, bound);
    p.tensors.emplace(s.name, std::move(m));
  }
  return p;
}

// ---- tape builders ---------------------------------------------------------

int TapeParams::get(const std::string& name) const {
  auto it = leaf.find(name);
  if (it == leaf.end()) throw Error("unknown tensor: " + name);
  return it->second;
}

TapeParams add_params(Tape& tape, const GmnParams& params, bool requires_grad) {
  TapeParams tp;
  for (const auto& [name, mat] : params.tensors)
    tp.leaf[name] = tape.leaf(mat, requires_grad);
  return tp;
}

int mlp2_on_tape(Tape& tape, const TapeParams& tp, const std::string& prefix,
                 int x) {
  int h = tape.add_rowvec(tape.matmul(x, tp.get(prefix + ".l0.weight")),
                          tp.get(prefix + ".l0.bias"));
  h = tape.relu(h);
  return tape.add_rowvec(tape.matmul(h, tp.get(prefix + ".l1.weight")),
                         tp.get(prefix + ".l1.bias"));
}

int content_encode_on_tape(Tape& tape, const TapeParams& tp,
                           const ModelConfig& cfg, int onehot_leaf) {
  const int k = cfg.content_kernel;
  const int pad = k / 2;
  int x = onehot_leaf;
  for (int s = 1; s <= 4; ++s) {
    for (int b = 0; b < cfg.content_blocks_per_stage; ++b) {
      const std::string pre =
          "content_net.stage" + std::to_string(s) + ".block" + std::to_string(b);
      const int stride = b == 0 ? 2 : 1;
      int y = tape.relu(tape.conv1d(x, tp.get(pre + ".conv0.weight"),
                                    tp.get(pre + ".conv0.bias"), k, stride,
                                    pad));
      int z = tape.conv1d(y, tp.get(pre + ".conv1.weight"),
                          tp.get(pre + ".conv1.bias"), k, 1, pad);
      int skip = x;
      if (b == 0)
        skip = tape.conv1d(x, tp.get(pre + ".proj.weight"),
                           tp.get(pre + ".proj.bias"), 1, 2, 0);
      x = tape.relu(tape.add(z, skip));
    }
  }
  int gap = tape.mean_rows(x);
  return tape.add_rowvec(tape.matmul(gap, tp.get("content_net.head.weight")),
                         tp.get("content_net.head.bias"));
}

GraphWiring wire_graph(const ProgramGraph& g) {
  GraphWiring w;
  w.n = static_cast<int>(g.nodes.size());
  for (const GraphNode& n : g.nodes) {
    if (n.computing) {
      w.comp_ids.push_back(n.id);
      w.comp_opcodes.push_back(static_cast<int>(n.opcode));
    } else {
      w.cont_ids.push_back(n.id);
      w.cont_texts.push_back(n.label);
    }
  }
  for (const GraphEdge& e : g.edges) {
    // both directions carry the edge's kind embedding
    w.msg_tgt.push_back(e.dst);
    w.msg_src.push_back(e.src);
    w.msg_kind.push_back(static_cast<int>(e.kind));
    w.msg_tgt.push_back(e.src);
    w.msg_src.push_back(e.dst);
    w.msg_kind.push_back(static_cast<int>(e.kind));
  }
  const int E = static_cast<int>(w.msg_tgt.size());
  w.scatter = Mat(w.n, E);
  for (int i = 0; i < E; ++i) w.scatter.at(w.msg_tgt[i], i) = 1.0;
  w.adjacency = Mat(w.n, w.n);
  for (const GraphEdge& e : g.edges) {
    if (e.src == e.dst) continue;
    w.adjacency.at(e.src, e.dst) = 1.0;
    w.adjacency.at(e.dst, e.src) = 1.0;
  }
  return w;
}

int initial_states_on_tape(Tape& tape, const TapeParams& tp,
                           const ModelConfig& cfg, const GraphWiring& w,
                           std::map<std::string, int>& content_cache) {
  std::vector<int> parts;
  std::vector<int> rows;
  if (!w.comp_ids.empty()) {
    int comp = tape.gather_rows(tp.get("opcode_table"), w.comp_opcodes);
    parts.push_back(tape.scatter_rows(comp, w.comp_ids, w.n));
  }
  if (!w.cont_ids.empty()) {
    std::vector<int> encoded;
    for (const std::string& text : w.cont_texts) {
      auto it = content_cache.find(text);
      if (it == content_cache.end()) {
        int onehot = tape.leaf(ascii_onehot(text), false);
        int row = content_encode_on_tape(tape, tp, cfg, onehot);
        it = content_cache.emplace(text, row).first;
      }
      encoded.push_back(it->second);
    }
    int stacked = tape.concat_rows(encoded);
    parts.push_back(tape.scatter_rows(stacked, w.cont_ids, w.n));
  }
  (void)rows;
  if (parts.empty()) throw Error("empty graph");
  int h = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) h = tape.add(h, parts[i]);
  return h;
}

namespace {

int inner_messages(Tape& tape, const TapeParams& tp, const GraphWiring& w,
                   int h) {
  if (w.msg_tgt.empty()) {
    // no edges: zero message matrix
    return tape.leaf(Mat(w.n, tape.val(tp.get("inner.l1.weight")).cols), false);
  }
  int ht = tape.gather_rows(h, w.msg_tgt);
  int hs = tape.gather_rows(h, w.msg_src);
  int ek = tape.gather_rows(tp.get("edge_table"), w.msg_kind);
  int x = tape.concat_cols(tape.concat_cols(ht, hs), ek);
  int msg = mlp2_on_tape(tape, tp, "inner", x);
  int scatter = tape.leaf(w.scatter, false);
  return tape.matmul(scatter, msg);
}

int gru_update(Tape& tape, const TapeParams& tp, int h, int x) {
  auto gate = [&](const char* g) {
    return tape.add_rowvec(
        tape.add(tape.matmul(x, tp.get(std::string("gru.w") + g)),
                 tape.matmul(h, tp.get(std::string("gru.u") + g))),
        tp.get(std::string("gru.b") + g));
  };
  int z = tape.sigmoid(gate("z"));
  int r = tape.sigmoid(gate("r"));
  int cand = tape.tanh_op(tape.add_rowvec(
      tape.add(tape.matmul(x, tp.get("gru.wn")),
               tape.matmul(tape.hadamard(r, h), tp.get("gru.un"))),
      tp.get("gru.bn")));
  // h' = h + z * (cand - h)
  return tape.add(h, tape.hadamard(z, tape.sub(cand, h)));
}

int fused_representation(Tape& tape, const TapeParams& tp, int h, int p) {
  return mlp2_on_tape(tape, tp, "fusion", tape.concat_cols(h, p));
}

struct CrossNodes {
  int mu1, mu2, a12, a21;
};

CrossNodes cross_on_tape(Tape& tape, const TapeParams& tp,
                         const ModelConfig& cfg, int h1, int p1, int h2,
                         int p2) {
  int r1 = fused_representation(tape, tp, h1, p1);
  int r2 = fused_representation(tape, tp, h2, p2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_h));
  int logits = tape.affine(tape.matmul(r1, tape.transpose(r2)), scale, 0.0);
  int a12 = tape.softmax_rows(logits);
  int a21 = tape.softmax_rows(tape.transpose(logits));
  int mu1 = tape.sub(r1, tape.matmul(a12, r2));
  int mu2 = tape.sub(r2, tape.matmul(a21, r1));
  return {mu1, mu2, a12, a21};
}

int positional_update(Tape& tape, const TapeParams& tp, const GraphWiring& w,
                      int p) {
  int adj = tape.leaf(w.adjacency, false);
  int nsum = tape.matmul(adj, p);
  return tape.tanh_op(tape.add(tape.matmul(p, tp.get("pos.w")),
                               tape.matmul(nsum, tp.get("pos.u"))));
}

}  // namespace

StepNodes propagate_on_tape(Tape& tape, const TapeParams& tp,
                            const ModelConfig& cfg, const GraphWiring& w1,
                            const GraphWiring& w2, const StepNodes& in) {
  CrossNodes cx = cross_on_tape(tape, tp, cfg, in.h1, in.p1, in.h2, in.p2);
  int m1 = inner_messages(tape, tp, w1, in.h1);
  int m2 = inner_messages(tape, tp, w2, in.h2);
  StepNodes out;
  out.h1 = gru_update(tape, tp, in.h1, tape.concat_cols(m1, cx.mu1));
  out.h2 = gru_update(tape, tp, in.h2, tape.concat_cols(m2, cx.mu2));
  out.p1 = positional_update(tape, tp, w1, in.p1);
  out.p2 = positional_update(tape, tp, w2, in.p2);
  out.a12 = cx.a12;
  out.a21 = cx.a21;
  return out;
}

int aggregate_on_tape(Tape& tape, const TapeParams& tp, int h) {
  int gate = tape.sigmoid(mlp2_on_tape(tape, tp, "agg.gate", h));
  int tr = mlp2_on_tape(tape, tp, "agg.transform", h);
  int pooled = tape.sum_rows(tape.hadamard(gate, tr));
  return mlp2_on_tape(tape, tp, "agg.out", pooled);
}

std::pair<Mat, Mat> pair_positional(const MergedGraph& pair,
                                    const ModelConfig& cfg) {
  if (cfg.pe_mode == PeMode::Global) return global_rwpe_encode(pair, cfg.K);
  return {rwpe_encode(pair.left, cfg.K), rwpe_encode(pair.right, cfg.K)};
}

ForwardNodes build_pair_forward(Tape& tape, const TapeParams& tp,
                                const MergedGraph& pair,
                                const GmnParams& params) {
  auto [pe1, pe2] = pair_positional(pair, params.config);
  return build_pair_forward_pe(tape, tp, pair, params, pe1, pe2);
}

ForwardNodes build_pair_forward_pe(Tape& tape, const TapeParams& tp,
                                   const MergedGraph& pair,
                                   const GmnParams& params, const Mat& pe1,
                                   const Mat& pe2) {
  const ModelConfig& cfg = params.config;
  GraphWiring w1 = wire_graph(pair.left);
  GraphWiring w2 = wire_graph(pair.right);
  std::map<std::string, int> cache1, cache2;
  StepNodes st;
  st.h1 = initial_states_on_tape(tape, tp, cfg, w1, cache1);
  st.h2 = initial_states_on_tape(tape, tp, cfg, w2, cache2);
  st.p1 = tape.leaf(pe1, false);
  st.p2 = tape.leaf(pe2, false);
  ForwardNodes out;
  for (int t = 0; t < cfg.T; ++t) {
    st = propagate_on_tape(tape, tp, cfg, w1, w2, st);
    tape.check_finite(st.h1, "propagation step " + std::to_string(t + 1));
    tape.check_finite(st.h2, "propagation step " + std::to_string(t + 1));
    out.att12.push_back(st.a12);
    out.att21.push_back(st.a21);
  }
  out.h_g1 = aggregate_on_tape(tape, tp, st.h1);
  out.h_g2 = aggregate_on_tape(tape, tp, st.h2);
  out.distance = tape.norm2(tape.sub(out.h_g1, out.h_g2));
  return out;
}

// ---- public spec operations ------------------------------------------------

std::pair<Mat, Mat> init_states(const ProgramGraph& g, const Mat& pe,
                                const GmnParams& params) {
  if (pe.rows != static_cast<int>(g.nodes.size()))
    throw ShapeMismatch("positional rows disagree with graph nodes");
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  GraphWiring w = wire_graph(g);
  std::map<std::string, int> cache;
  int h = initial_states_on_tape(tape, tp, params.config, w, cache);
  return {tape.val(h), pe};
}

CrossAttention cross_attention(const Mat& H1, const Mat& P1, const Mat& H2,
                               const Mat& P2, const GmnParams& params) {
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  int h1 = tape.leaf(H1, false), p1 = tape.leaf(P1, false);
  int h2 = tape.leaf(H2, false), p2 = tape.leaf(P2, false);
  CrossNodes cx = cross_on_tape(tape, tp, params.config, h1, p1, h2, p2);
  tape.check_finite(cx.mu1, "cross attention");
  tape.check_finite(cx.mu2, "cross attention");
  return {tape.val(cx.mu1), tape.val(cx.mu2), tape.val(cx.a12),
          tape.val(cx.a21)};
}

PairState propagate_step(const PairState& state, const ProgramGraph& g1,
                         const ProgramGraph& g2, const GmnParams& params) {
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  GraphWiring w1 = wire_graph(g1);
  GraphWiring w2 = wire_graph(g2);
  StepNodes in;
  in.h1 = tape.leaf(state.H1, false);
  in.p1 = tape.leaf(state.P1, false);
  in.h2 = tape.leaf(state.H2, false);
  in.p2 = tape.leaf(state.P2, false);
  StepNodes out = propagate_on_tape(tape, tp, params.config, w1, w2, in);
  tape.check_finite(out.h1, "propagate_step");
  tape.check_finite(out.h2, "propagate_step");
  PairState next;
  next.H1 = tape.val(out.h1);
  next.P1 = tape.val(out.p1);
  next.H2 = tape.val(out.h2);
  next.P2 = tape.val(out.p2);
  next.att12 = state.att12;
  next.att21 = state.att21;
  next.att12.push_back(tape.val(out.a12));
  next.att21.push_back(tape.val(out.a21));
  return next;
}

Mat aggregate_graph(const Mat& H, const GmnParams& params) {
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  int h = tape.leaf(H, false);
  return tape.val(aggregate_on_tape(tape, tp, h));
}

PairScore pair_score(const MergedGraph& pair, const GmnParams& params) {
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  ForwardNodes fwd = build_pair_forward(tape, tp, pair, params);
  PairScore score;
  score.distance = tape.val(fwd.distance).at(0, 0);
  score.raw_score = -score.distance;
  for (int id : fwd.att12) score.att12.push_back(tape.val(id));
  for (int id : fwd.att21) score.att21.push_back(tape.val(id));
  return score;
}

double margin_loss(double distance, int label, double gamma) {
  if (label != 1 && label != -1) throw Error("label must be +1 or -1");
  if (!(gamma > 0.0)) throw Error("margin gamma must be positive");
  const double t = static_cast<double>(label);
  return std::max(0.0, gamma - t * (1.0 - distance));
}

PairGradients pair_loss_gradients(const MergedGraph& pair,
                                  const GmnParams& params, int label,
                                  double gamma) {
  if (label != 1 && label != -1) throw Error("label must be +1 or -1");
  Tape tape;
  TapeParams tp = add_params(tape, params, true);
  ForwardNodes fwd = build_pair_forward(tape, tp, pair, params);
  const double t = static_cast<double>(label);
  // gamma - t(1 - s) == t*s + (gamma - t)
  int loss = tape.relu(tape.affine(fwd.distance, t, gamma - t));
  tape.backward(loss);
  PairGradients out;
  out.distance = tape.val(fwd.distance).at(0, 0);
  out.loss = tape.val(loss).at(0, 0);
  for (const auto& [name, leaf_id] : tp.leaf)
    out.grads.emplace(name, tape.grad(leaf_id));
  return out;
}

namespace {

double loss_only(const MergedGraph& pair, const GmnParams& params, int label,
                 double gamma) {
  Tape tape;
  TapeParams tp = add_params(tape, params, false);
  ForwardNodes fwd = build_pair_forward(tape, tp, pair, params);
  return margin_loss(tape.val(fwd.distance).at(0, 0), label, gamma);
}

}  // namespace

GradCheckReport grad_check(const GmnParams& params, const MergedGraph& pair,
                           int label, double gamma, double eps,
                           double tolerance) {
  PairGradients analytic = pair_loss_gradients(pair, params, label, gamma);
  GradCheckReport report;
  GmnParams probe = params;
  for (auto& [name, mat] : probe.tensors) {
    const Mat& grad = analytic.grads.at(name);
    double scale = 1e-3;  // floor keeps near-zero tensors well-conditioned
    double worst = 0.0;
    for (std::size_t i = 0; i < mat.size(); ++i) {
      const double saved = mat.d[i];
      mat.d[i] = saved + eps;
      const double up = loss_only(pair, probe, label, gamma);
      mat.d[i] = saved - eps;
      const double down = loss_only(pair, probe, label, gamma);
      mat.d[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double a = grad.d[i];
      const double err =
          std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), scale});
      worst = std::max(worst, err);
    }
    report.per_tensor[name] = worst;
    if (worst > report.max_rel_err) {
      report.max_rel_err = worst;
      report.worst_tensor = name;
    }
  }
  if (report.max_rel_err > tolerance)
    throw GradMismatch(report.worst_tensor, report.max_rel_err);
  return report;
}

}  // namespace sqlfunc
