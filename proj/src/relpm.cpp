#include "sqlfunc/relpm.hpp"

#include <functional>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

namespace {

int add_rot_nodes(MatchTree& t, const RotNode& n) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back({});
  t.nodes[id].val = n.val();
  t.nodes[id].weight_key = n.content ? "#content" : opcode_name(n.op);
  for (const RotNode& c : n.children) {
    int cid = add_rot_nodes(t, c);
    t.nodes[id].children.push_back(cid);
  }
  return id;
}

std::string ast_val(const AstNode& n) {
  switch (n.kind) {
    case AstKind::SelectStmt:
      return n.flag ? "SelectStmt:distinct" : "SelectStmt";
    case AstKind::JoinClause:
      return "JoinClause:" + n.op;
    case AstKind::SetOp:
      return "SetOp:" + n.op + (n.flag ? ":all" : "");
    case AstKind::OrderBy:
      return "OrderBy:" + n.direction +
             (n.nulls_order.empty() ? "" : ":" + n.nulls_order);
    case AstKind::FuncCall:
      return "FuncCall:" + n.name + (n.flag ? ":distinct" : "");
    case AstKind::BinaryOp:
    case AstKind::UnaryOp:
      return "Op:" + n.op;
    case AstKind::ColumnRef:
      return n.qualifier.empty() ? n.name : n.qualifier + "." + n.name;
    case AstKind::TableRef:
      return n.name;
    case AstKind::Literal:
      return n.name;
    case AstKind::Star:
      return n.qualifier.empty() ? "*" : n.qualifier + ".*";
    default:
      return ast_kind_name(n.kind);
  }
}

int add_ast_nodes(MatchTree& t, const AstNode& n) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back({});
  t.nodes[id].val = ast_val(n);
  t.nodes[id].weight_key = ast_kind_name(n.kind);
  for (const AstNode& c : n.children) {
    int cid = add_ast_nodes(t, c);
    t.nodes[id].children.push_back(cid);
  }
  return id;
}

class Matcher {
 public:
  Matcher(const MatchTree& s, const MatchTree& t, const MatchConfig& cfg)
      : s_(s), t_(t), cfg_(cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
      throw Error("alpha must lie strictly inside (0,1)");
    if (!(cfg.beta > 0.0)) throw Error("beta must be positive");
    memo_.assign(s.nodes.size() * t.nodes.size(), -1.0);
  }

  double run(std::map<int, double>* per_node) {
    double score = match(0, 0);
    if (per_node) {
      for (std::size_t si = 0; si < s_.nodes.size(); ++si) {
        double best = 0.0;
        bool seen = false;
        for (std::size_t ti = 0; ti < t_.nodes.size(); ++ti) {
          double m = memo_[si * t_.nodes.size() + ti];
          if (m >= 0.0) {
            best = std::max(best, m);
            seen = true;
          }
        }
        if (seen) (*per_node)[static_cast<int>(si)] = best;
      }
      (*per_node)[0] = score;
    }
    return score;
  }

  double match(int si, int ti) {
    double& slot = memo_[static_cast<std::size_t>(si) * t_.nodes.size() + ti];
    if (slot >= 0.0) return slot;
    const MatchTree::Node& s = s_.nodes[si];
    const MatchTree::Node& t = t_.nodes[ti];
    const double m_root = s.val == t.val ? 1.0 : 0.0;
    if (s.children.empty() || t.children.empty()) {
      slot = m_root;
      return slot;
    }
    double child_total = 0.0;
    double weight_total = 0.0;
    for (int sc : s.children) {
      double m = 0.0;
      for (int tc : t.children) m = std::max(m, match(sc, tc));
      const double w = child_weight(s_.nodes[sc]);
      child_total += w * m;
      weight_total += w;
    }
    const double m_children =
        weight_total > 0.0 ? child_total / weight_total : 0.0;
    slot = m_root * cfg_.alpha + (1.0 - cfg_.alpha) * m_children;
    return slot;
  }

 private:
  double child_weight(const MatchTree::Node& n) const {
    if (!cfg_.node_weights) return 1.0;
    auto it = cfg_.node_weights->find(n.weight_key);
    if (it == cfg_.node_weights->end()) return 1.0;
    if (it->second <= 0.0) throw Error("node weights must be positive");
    return it->second;
  }

  const MatchTree& s_;
  const MatchTree& t_;
  const MatchConfig& cfg_;
  std::vector<double> memo_;
};

}  // namespace

MatchTree MatchTree::from_rot(const RotNode& root) {
  MatchTree t;
  add_rot_nodes(t, root);
  return t;
}

MatchTree MatchTree::from_ast(const AstNode& root) {
  MatchTree t;
  add_ast_nodes(t, root);
  return t;
}

int calc_node(const MatchTree& a, int ai, const MatchTree& b, int bi) {
  return a.nodes[ai].val == b.nodes[bi].val ? 1 : 0;
}

double node_match(const MatchTree& s, const MatchTree& t,
                  const MatchConfig& cfg) {
  Matcher m(s, t, cfg);
  return m.run(nullptr);
}

double f_beta_score(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

MatchResult match_trees(const MatchTree& source, const MatchTree& target,
                        const MatchConfig& cfg) {
  MatchResult r;
  Matcher fwd(source, target, cfg);
  Matcher bwd(target, source, cfg);
  double forward = fwd.run(&r.per_node);
  double backward = bwd.run(nullptr);
  r.recall = cfg.swap_roles ? backward : forward;
  r.precision = cfg.swap_roles ? forward : backward;
  r.f_beta = f_beta_score(r.precision, r.recall, cfg.beta);
  return r;
}

MatchResult relpm_score(const Rot& source, const Rot& target,
                        const MatchConfig& cfg) {
  return match_trees(MatchTree::from_rot(source.root),
                     MatchTree::from_rot(target.root), cfg);
}

MatchResult astpm_score(const SqlAst& a, const SqlAst& b,
                        const MatchConfig& cfg) {
  return match_trees(MatchTree::from_ast(a.root), MatchTree::from_ast(b.root),
                     cfg);
}

std::vector<std::pair<int, int>> find_seed_pairs(const Rot& r1, const Rot& r2) {
  // preorder ids of the layer-2 roots
  auto layer2_ids = [](const Rot& r) {
    std::vector<int> ids;
    int next = 1;  // Rels is node 0
    for (const RotNode& c : r.root.children) {
      ids.push_back(next);
      next += static_cast<int>(rot_size(c));
    }
    return ids;
  };
  std::vector<int> ids1 = layer2_ids(r1);
  std::vector<int> ids2 = layer2_ids(r2);
  std::vector<bool> used(r2.root.children.size(), false);
  std::vector<std::pair<int, int>> seeds;
  for (std::size_t i = 0; i < r1.root.children.size(); ++i) {
    for (std::size_t j = 0; j < r2.root.children.size(); ++j) {
      if (used[j]) continue;
      const RotNode& a = r1.root.children[i];
      const RotNode& b = r2.root.children[j];
      if (a.op != b.op) continue;
      if (!rot_structural_eq(a, b)) continue;
      used[j] = true;
      seeds.emplace_back(ids1[i], ids2[j]);
      break;
    }
  }
  return seeds;
}

}  // namespace sqlfunc
