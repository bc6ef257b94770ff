#include "sqlfunc/graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include <json.hpp>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

using nlohmann::json;

namespace {

struct BuildCtx {
  ProgramGraph g;
  // column-content occurrences: (layer2 index, node id, binding text)
  std::vector<std::tuple<int, int, std::string>> columns;
};

int add_nodes(BuildCtx& ctx, const RotNode& n, int depth, int op_index) {
  const int id = static_cast<int>(ctx.g.nodes.size());
  GraphNode gn;
  gn.id = id;
  gn.computing = !n.content;
  gn.opcode = n.content ? Opcode::Rels : n.op;
  gn.label = n.val();
  gn.depth = depth;
  ctx.g.nodes.push_back(std::move(gn));
  if (n.content && n.ck == ContentKind::Column)
    ctx.columns.emplace_back(op_index, id, n.text);
  for (const RotNode& c : n.children) {
    int cid = add_nodes(ctx, c, depth + 1, op_index);
    ctx.g.edges.push_back({id, cid, EdgeKind::Syntax});
  }
  return id;
}

// Parsed layer-2 structure for logic-flow emission.
struct Seg {
  int node_id = 0;
  Opcode op = Opcode::Values;
  std::vector<Seg> inputs;
};

Seg parse_layer2(const std::vector<int>& ids, const std::vector<Opcode>& ops) {
  std::vector<Seg> stack;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Seg s;
    s.node_id = ids[i];
    s.op = ops[i];
    int arity = relational_arity(ops[i]);
    s.inputs.insert(s.inputs.end(),
                    std::make_move_iterator(stack.end() - arity),
                    std::make_move_iterator(stack.end()));
    stack.erase(stack.end() - arity, stack.end());
    stack.push_back(std::move(s));
  }
  return std::move(stack.front());
}

bool is_set_op(Opcode op) {
  return op == Opcode::Union || op == Opcode::Intersect || op == Opcode::Minus;
}

// Emits logic-flow edges; returns (first, last) node ids of the segment's
// chain. Set operations chain each branch separately into the set node;
// everything else chains consecutively in execution order.
std::pair<int, int> emit_logic(const Seg& s, std::vector<GraphEdge>& edges) {
  if (is_set_op(s.op)) {
    int first = -1;
    for (const Seg& in : s.inputs) {
      auto [f, l] = emit_logic(in, edges);
      if (first < 0) first = f;
      edges.push_back({l, s.node_id, EdgeKind::LogicFlow});
    }
    return {first < 0 ? s.node_id : first, s.node_id};
  }
  int first = s.node_id;
  int prev_last = -1;
  for (const Seg& in : s.inputs) {
    auto [f, l] = emit_logic(in, edges);
    if (prev_last >= 0) edges.push_back({prev_last, f, EdgeKind::LogicFlow});
    if (first == s.node_id) first = f;
    prev_last = l;
  }
  if (prev_last >= 0)
    edges.push_back({prev_last, s.node_id, EdgeKind::LogicFlow});
  return {first, s.node_id};
}

void sort_edges(std::vector<GraphEdge>& edges) {
  std::sort(edges.begin(), edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) {
              if (a.src != b.src) return a.src < b.src;
              if (a.dst != b.dst) return a.dst < b.dst;
              return static_cast<int>(a.kind) < static_cast<int>(b.kind);
            });
}

json graph_to_json_obj(const ProgramGraph& g) {
  json j;
  j["nodes"] = json::array();
  for (const GraphNode& n : g.nodes)
    j["nodes"].push_back({{"id", n.id},
                          {"kind", n.computing ? "computing" : "content"},
                          {"label", n.label}});
  j["edges"] = json::array();
  for (const GraphEdge& e : g.edges)
    j["edges"].push_back(
        {{"src", e.src}, {"dst", e.dst}, {"kind", static_cast<int>(e.kind)}});
  return j;
}

ProgramGraph graph_from_json_obj(const json& j) {
  ProgramGraph g;
  for (const auto& jn : j.at("nodes")) {
    GraphNode n;
    n.id = jn.at("id").get<int>();
    n.label = jn.at("label").get<std::string>();
    n.computing = jn.at("kind").get<std::string>() == "computing";
    if (n.computing) {
      auto op = opcode_from_name(n.label);
      if (!op) throw FormatError(0, "unknown opcode label: " + n.label);
      n.opcode = *op;
    }
    g.nodes.push_back(std::move(n));
  }
  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
  for (const auto& je : j.at("edges"))
    g.edges.push_back({je.at("src").get<int>(), je.at("dst").get<int>(),
                       static_cast<EdgeKind>(je.at("kind").get<int>())});
  sort_edges(g.edges);
  // depth and layer-2 roots re-derive from the syntax tree
  std::map<int, std::vector<int>> children;
  for (const GraphEdge& e : g.edges)
    if (e.kind == EdgeKind::Syntax) children[e.src].push_back(e.dst);
  std::function<void(int, int)> set_depth = [&](int id, int d) {
    g.nodes[id].depth = d;
    for (int c : children[id]) set_depth(c, d + 1);
  };
  if (!g.nodes.empty()) set_depth(0, 0);
  for (int c : children[0])
    g.layer2.push_back(c);
  return g;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

const char* edge_color(EdgeKind k) {
  switch (k) {
    case EdgeKind::Syntax: return "black";
    case EdgeKind::LogicFlow: return "orange";
    case EdgeKind::DataFlow: return "green";
  }
  return "black";
}

void dot_nodes(std::string& out, const ProgramGraph& g,
               const std::string& prefix) {
  for (const GraphNode& n : g.nodes) {
    out += "    " + prefix + std::to_string(n.id) + " [label=\"" +
           dot_escape(n.label) + "\"" +
           (n.computing ? " shape=box" : " shape=ellipse") + "];\n";
  }
  for (const GraphEdge& e : g.edges) {
    out += "    " + prefix + std::to_string(e.src) + " -> " + prefix +
           std::to_string(e.dst) + " [color=" + edge_color(e.kind) + "];\n";
  }
}

void check_attention(const Mat& att, const MergedGraph& m) {
  if (att.rows != static_cast<int>(m.left.nodes.size()) ||
      att.cols != static_cast<int>(m.right.nodes.size()))
    throw ShapeMismatch("attention dims disagree with the graph pair");
}

}  // namespace

bool ProgramGraph::is_layer2_root(int id) const {
  return std::find(layer2.begin(), layer2.end(), id) != layer2.end();
}

ProgramGraph build_program_graph(const Rot& rot, FlowSet flows) {
  validate_rot(rot);
  BuildCtx ctx;
  // Rels subtree with per-layer-2-operator indices for data-flow ordering.
  const int root_id = static_cast<int>(ctx.g.nodes.size());
  GraphNode root;
  root.id = root_id;
  root.computing = true;
  root.opcode = Opcode::Rels;
  root.label = opcode_name(Opcode::Rels);
  root.depth = 0;
  ctx.g.nodes.push_back(std::move(root));
  std::vector<Opcode> ops;
  for (std::size_t i = 0; i < rot.root.children.size(); ++i) {
    const RotNode& c = rot.root.children[i];
    int cid = add_nodes(ctx, c, 1, static_cast<int>(i));
    ctx.g.edges.push_back({root_id, cid, EdgeKind::Syntax});
    ctx.g.layer2.push_back(cid);
    ops.push_back(c.op);
  }

  if (flows.logic && !ctx.g.layer2.empty()) {
    Seg top = parse_layer2(ctx.g.layer2, ops);
    emit_logic(top, ctx.g.edges);
  }

  if (flows.data) {
    // chain occurrences of each column in execution order
    std::map<std::string, std::vector<std::pair<int, int>>> by_col;
    for (const auto& [op_idx, id, text] : ctx.columns)
      by_col[text].emplace_back(op_idx, id);
    for (auto& [text, occ] : by_col) {
      std::stable_sort(occ.begin(), occ.end());
      for (std::size_t i = 1; i < occ.size(); ++i)
        ctx.g.edges.push_back(
            {occ[i - 1].second, occ[i].second, EdgeKind::DataFlow});
    }
  }

  sort_edges(ctx.g.edges);
  return std::move(ctx.g);
}

MergedGraph merge_graph_pair(const ProgramGraph& g1, const ProgramGraph& g2,
                             const std::vector<std::pair<int, int>>& seeds) {
  MergedGraph m;
  m.left = g1;
  m.right = g2;
  m.cross_links.push_back({0, 0, LinkKind::RelsLink});
  std::set<int> used_l, used_r;
  for (const auto& [l, r] : seeds) {
    if (!g1.is_layer2_root(l))
      throw InvalidSeed("node " + std::to_string(l) +
                        " is not a layer-2 root of the left graph");
    if (!g2.is_layer2_root(r))
      throw InvalidSeed("node " + std::to_string(r) +
                        " is not a layer-2 root of the right graph");
    if (!used_l.insert(l).second || !used_r.insert(r).second)
      throw InvalidSeed("seed endpoints must be used at most once");
    m.cross_links.push_back({l, r, LinkKind::SeedLink});
  }
  return m;
}

bool graph_eq(const ProgramGraph& a, const ProgramGraph& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size())
    return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const GraphNode& x = a.nodes[i];
    const GraphNode& y = b.nodes[i];
    if (x.id != y.id || x.computing != y.computing || x.label != y.label)
      return false;
    if (x.computing && x.opcode != y.opcode) return false;
  }
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    const GraphEdge& x = a.edges[i];
    const GraphEdge& y = b.edges[i];
    if (x.src != y.src || x.dst != y.dst || x.kind != y.kind) return false;
  }
  return true;
}

std::string export_graph_dot(const ProgramGraph& g) {
  std::string out = "digraph program_graph {\n";
  dot_nodes(out, g, "n");
  out += "}\n";
  return out;
}

std::string export_graph_json(const ProgramGraph& g, int indent) {
  return graph_to_json_obj(g).dump(indent);
}

std::string export_merged_dot(const MergedGraph& m, const Mat* attention) {
  if (attention) check_attention(*attention, m);
  std::string out = "digraph merged_pair {\n";
  out += "  subgraph cluster_left {\n    label=\"left\";\n";
  dot_nodes(out, m.left, "l");
  out += "  }\n";
  out += "  subgraph cluster_right {\n    label=\"right\";\n";
  dot_nodes(out, m.right, "r");
  out += "  }\n";
  for (const CrossLink& c : m.cross_links) {
    out += "  l" + std::to_string(c.left) + " -> r" + std::to_string(c.right) +
           " [style=dashed dir=none color=" +
           (c.kind == LinkKind::RelsLink ? std::string("blue")
                                         : std::string("purple")) +
           "];\n";
  }
  if (attention) {
    // one edge per left node to its highest-attention counterpart
    for (int i = 0; i < attention->rows; ++i) {
      int best = 0;
      for (int j = 1; j < attention->cols; ++j)
        if (attention->at(i, j) > attention->at(i, best)) best = j;
      char w[32];
      snprintf(w, sizeof(w), "%.3f", attention->at(i, best));
      out += "  l" + std::to_string(i) + " -> r" + std::to_string(best) +
             " [color=green penwidth=" + std::string(w) + " label=\"" + w +
             "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

std::string export_merged_json(const MergedGraph& m, const Mat* attention,
                               int indent) {
  if (attention) check_attention(*attention, m);
  json j;
  j["left"] = graph_to_json_obj(m.left);
  j["right"] = graph_to_json_obj(m.right);
  j["cross_links"] = json::array();
  for (const CrossLink& c : m.cross_links)
    j["cross_links"].push_back(
        {{"left", c.left},
         {"right", c.right},
         {"kind", c.kind == LinkKind::RelsLink ? "rels" : "seed"}});
  if (attention) {
    json rows = json::array();
    for (int i = 0; i < attention->rows; ++i) {
      json row = json::array();
      for (int jx = 0; jx < attention->cols; ++jx)
        row.push_back(attention->at(i, jx));
      rows.push_back(std::move(row));
    }
    j["attention"] = std::move(rows);
  }
  return j.dump(indent);
}

ProgramGraph graph_from_json(const std::string& text) {
  return graph_from_json_obj(json::parse(text));
}

MergedGraph merged_from_json(const std::string& text) {
  json j = json::parse(text);
  MergedGraph m;
  m.left = graph_from_json_obj(j.at("left"));
  m.right = graph_from_json_obj(j.at("right"));
  for (const auto& jc : j.at("cross_links"))
    m.cross_links.push_back(
        {jc.at("left").get<int>(), jc.at("right").get<int>(),
         jc.at("kind").get<std::string>() == "rels" ? LinkKind::RelsLink
                                                    : LinkKind::SeedLink});
  return m;
}

}  // namespace sqlfunc
