#include "sqlfunc/rules.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>

#include "plan_internal.hpp"
#include "sqlfunc/errors.hpp"

namespace sqlfunc {

namespace {

// ---- literal helpers ------------------------------------------------------

bool is_literal(const RotNode& n, const char* text) {
  return n.content && n.ck == ContentKind::Literal && n.text == text;
}

RotNode bool_literal(bool v) {
  return RotNode::make_content(ContentKind::Literal, v ? "true" : "false");
}

std::optional<double> numeric_value(const RotNode& n) {
  if (!n.content || n.ck != ContentKind::Literal) return std::nullopt;
  const std::string& s = n.text;
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_integral_literal(const RotNode& n) {
  if (!n.content || n.ck != ContentKind::Literal || n.text.empty()) return false;
  std::size_t i = n.text[0] == '-' ? 1 : 0;
  if (i >= n.text.size()) return false;
  for (; i < n.text.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(n.text[i]))) return false;
  return true;
}

RotNode number_literal(double v) {
  char buf[32];
  auto [q, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return RotNode::make_content(ContentKind::Literal, std::string(buf, q));
}

RotNode int_literal(long long v) {
  return RotNode::make_content(ContentKind::Literal, std::to_string(v));
}

bool is_string_literal(const RotNode& n) {
  return n.content && n.ck == ContentKind::Literal && !numeric_value(n) &&
         n.text != "true" && n.text != "false" && n.text != "null";
}

// ---- expression traversal --------------------------------------------------

void collect_columns(const RotNode& n, std::set<std::string>& out) {
  if (n.content) {
    if (n.ck == ContentKind::Column) out.insert(n.text);
    return;
  }
  for (const RotNode& c : n.children) collect_columns(c, out);
}

bool contains_subquery(const RotNode& n) {
  if (!n.content &&
      (n.op == Opcode::Subquery || n.op == Opcode::InSubquery ||
       n.op == Opcode::Exists))
    return true;
  for (const RotNode& c : n.children)
    if (contains_subquery(c)) return true;
  return false;
}

std::string column_prefix(const std::string& binding) {
  std::size_t dot = binding.rfind('.');
  return dot == std::string::npos ? binding : binding.substr(0, dot);
}

// Scan instances plus named projection prefixes produced inside a plan;
// used to decide which join side a predicate belongs to.
void produced_prefixes(const Plan& p, std::set<std::string>& out) {
  if (p.op == Opcode::TableScan) {
    out.insert(p.exprs[0].text);
  } else if (p.op == Opcode::Project || p.op == Opcode::HashAggregate) {
    for (const RotNode& e : p.exprs)
      if (e.content && e.ck == ContentKind::Column)
        out.insert(column_prefix(e.text));
  }
  for (const Plan& in : p.inputs) produced_prefixes(in, out);
}

std::vector<RotNode> conjuncts_of(const RotNode& cond) {
  if (!cond.content && cond.op == Opcode::And) return cond.children;
  return {cond};
}

RotNode make_conjunction(std::vector<RotNode> parts) {
  if (parts.empty()) return bool_literal(true);
  if (parts.size() == 1) return std::move(parts[0]);
  return RotNode::computing(Opcode::And, std::move(parts));
}

// Output name used by consumers to address a projection item: the binding
// text for pass-through columns, unknown otherwise.
std::string output_name(const RotNode& expr) {
  if (expr.content && expr.ck == ContentKind::Column) return expr.text;
  return "";
}

// ---- constant folding ------------------------------------------------------

bool fold_expr(RotNode& n);

bool fold_children(RotNode& n) {
  bool changed = false;
  for (RotNode& c : n.children) changed |= fold_expr(c);
  return changed;
}

std::optional<RotNode> fold_comparison(const RotNode& n) {
  const RotNode& a = n.children[0];
  const RotNode& b = n.children[1];
  auto na = numeric_value(a);
  auto nb = numeric_value(b);
  int cmp;
  if (na && nb) {
    cmp = *na < *nb ? -1 : (*na > *nb ? 1 : 0);
  } else if (is_string_literal(a) && is_string_literal(b)) {
    cmp = a.text.compare(b.text);
    cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
  } else {
    return std::nullopt;
  }
  switch (n.op) {
    case Opcode::Eq: return bool_literal(cmp == 0);
    case Opcode::Ne: return bool_literal(cmp != 0);
    case Opcode::Lt: return bool_literal(cmp < 0);
    case Opcode::Le: return bool_literal(cmp <= 0);
    case Opcode::Gt: return bool_literal(cmp > 0);
    case Opcode::Ge: return bool_literal(cmp >= 0);
    default: return std::nullopt;
  }
}

std::optional<RotNode> fold_arith(const RotNode& n) {
  const RotNode& a = n.children[0];
  const RotNode& b = n.children[1];
  auto na = numeric_value(a);
  auto nb = numeric_value(b);
  if (!na || !nb) return std::nullopt;
  const bool ints = is_integral_literal(a) && is_integral_literal(b);
  if (ints) {
    long long x = std::stoll(a.text), y = std::stoll(b.text);
    switch (n.op) {
      case Opcode::Add: return int_literal(x + y);
      case Opcode::Sub: return int_literal(x - y);
      case Opcode::Mul: return int_literal(x * y);
      case Opcode::Div:
        if (y == 0) return std::nullopt;
        return int_literal(x / y);  // truncating division
      case Opcode::Mod:
        if (y == 0) return std::nullopt;
        return int_literal(x % y);
      default: return std::nullopt;
    }
  }
  switch (n.op) {
    case Opcode::Add: return number_literal(*na + *nb);
    case Opcode::Sub: return number_literal(*na - *nb);
    case Opcode::Mul: return number_literal(*na * *nb);
    case Opcode::Div:
      if (*nb == 0.0) return std::nullopt;
      return number_literal(*na / *nb);
    default: return std::nullopt;
  }
}

Opcode negated_comparison(Opcode op) {
  switch (op) {
    case Opcode::Eq: return Opcode::Ne;
    case Opcode::Ne: return Opcode::Eq;
    case Opcode::Lt: return Opcode::Ge;
    case Opcode::Le: return Opcode::Gt;
    case Opcode::Gt: return Opcode::Le;
    case Opcode::Ge: return Opcode::Lt;
    case Opcode::IsNull: return Opcode::IsNotNull;
    case Opcode::IsNotNull: return Opcode::IsNull;
    default: return Opcode::Not;
  }
}

bool fold_expr(RotNode& n) {
  if (n.content) return false;
  bool changed = fold_children(n);
  switch (n.op) {
    case Opcode::Eq:
    case Opcode::Ne:
    case Opcode::Lt:
    case Opcode::Le:
    case Opcode::Gt:
    case Opcode::Ge:
      if (auto r = fold_comparison(n)) {
        n = std::move(*r);
        return true;
      }
      break;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div:
    case Opcode::Mod:
      if (auto r = fold_arith(n)) {
        n = std::move(*r);
        return true;
      }
      break;
    case Opcode::Neg:
      if (auto v = numeric_value(n.children[0])) {
        if (is_integral_literal(n.children[0]))
          n = int_literal(-std::stoll(n.children[0].text));
        else
          n = number_literal(-*v);
        return true;
      }
      break;
    case Opcode::Not: {
      RotNode& c = n.children[0];
      if (is_literal(c, "true")) {
        n = bool_literal(false);
        return true;
      }
      if (is_literal(c, "false")) {
        n = bool_literal(true);
        return true;
      }
      if (!c.content && c.op == Opcode::Not) {
        RotNode inner = std::move(c.children[0]);
        n = std::move(inner);
        return true;
      }
      if (!c.content && negated_comparison(c.op) != Opcode::Not) {
        c.op = negated_comparison(c.op);
        n = std::move(c);
        return true;
      }
      break;
    }
    case Opcode::And:
    case Opcode::Or: {
      const bool is_and = n.op == Opcode::And;
      std::vector<RotNode> flat;
      bool local = false;
      for (RotNode& c : n.children) {
        if (!c.content && c.op == n.op) {
          for (RotNode& g : c.children) flat.push_back(std::move(g));
          local = true;
        } else {
          flat.push_back(std::move(c));
        }
      }
      std::vector<RotNode> kept;
      std::set<std::string> seen;
      for (RotNode& c : flat) {
        if (is_literal(c, is_and ? "true" : "false")) {
          local = true;  // neutral element
          continue;
        }
        if (is_literal(c, is_and ? "false" : "true")) {
          n = bool_literal(!is_and);
          return true;
        }
        std::string key = rot_serialize(c);
        if (!seen.insert(key).second) {
          local = true;  // duplicate operand
          continue;
        }
        kept.push_back(std::move(c));
      }
      if (kept.empty()) {
        n = bool_literal(is_and);
        return true;
      }
      if (kept.size() == 1) {
        RotNode only = std::move(kept[0]);
        n = std::move(only);
        return true;
      }
      if (local) {
        n.children = std::move(kept);
        return true;
      }
      n.children = std::move(kept);
      break;
    }
    default:
      break;
  }
  return changed;
}

// ---- rules over nested plans ----------------------------------------------

using PlanRule = std::function<bool(Plan&)>;

bool apply_to_subqueries(RotNode& expr, const PlanRule& rule) {
  bool changed = false;
  if (!expr.content && expr.op == Opcode::Subquery) {
    Plan sub = unflatten_sequence(expr.children);
    if (rule(sub)) {
      expr.children.clear();
      flatten_plan(sub, expr.children);
      changed = true;
    }
    return changed;
  }
  for (RotNode& c : expr.children) changed |= apply_to_subqueries(c, rule);
  return changed;
}

// Applies `fn` to every plan node bottom-up, including plans nested inside
// subquery expressions.
bool walk_plan(Plan& p, const PlanRule& fn) {
  bool changed = false;
  for (Plan& in : p.inputs) changed |= walk_plan(in, fn);
  for (RotNode& e : p.exprs)
    changed |= apply_to_subqueries(e, [&fn](Plan& sub) {
      return walk_plan(sub, fn);
    });
  changed |= fn(p);
  return changed;
}

// -- constant_fold -----------------------------------------------------------

bool rule_constant_fold(Plan& p) {
  return walk_plan(p, [](Plan& n) {
    bool changed = false;
    for (RotNode& e : n.exprs) changed |= fold_expr(e);
    if (n.op == Opcode::Filter) {
      if (is_literal(n.exprs[0], "true")) {
        Plan input = std::move(n.inputs[0]);
        n = std::move(input);
        return true;
      }
      if (is_literal(n.exprs[0], "false")) {
        Plan values;
        values.op = Opcode::Values;
        values.exprs.push_back(
            RotNode::make_content(ContentKind::Marker, "empty"));
        n = std::move(values);
        return true;
      }
    }
    return changed;
  });
}

// -- predicate_pushdown ------------------------------------------------------

bool pushdown_step(Plan& n);

bool rule_predicate_pushdown(Plan& p) {
  return walk_plan(p, [](Plan& n) { return pushdown_step(n); });
}

Plan wrap_filter(Plan input, std::vector<RotNode> conjuncts) {
  Plan f;
  f.op = Opcode::Filter;
  f.exprs.push_back(make_conjunction(std::move(conjuncts)));
  f.inputs.push_back(std::move(input));
  return f;
}

bool pushdown_step(Plan& n) {
  // Single-side conjuncts of an inner-join condition also move below.
  if (n.op == Opcode::JoinInner && !n.exprs.empty()) {
    std::vector<RotNode> parts = conjuncts_of(n.exprs[0]);
    if (parts.size() > 1 || !is_literal(n.exprs[0], "true")) {
      std::set<std::string> left, right;
      produced_prefixes(n.inputs[0], left);
      produced_prefixes(n.inputs[1], right);
      std::vector<RotNode> keep, push_l, push_r;
      for (RotNode& c : parts) {
        std::set<std::string> cols;
        collect_columns(c, cols);
        bool all_l = !cols.empty(), all_r = !cols.empty();
        for (const std::string& col : cols) {
          const std::string pre = column_prefix(col);
          all_l = all_l && left.count(pre) && !right.count(pre);
          all_r = all_r && right.count(pre) && !left.count(pre);
        }
        if (contains_subquery(c)) {
          keep.push_back(std::move(c));
        } else if (all_l) {
          push_l.push_back(std::move(c));
        } else if (all_r) {
          push_r.push_back(std::move(c));
        } else {
          keep.push_back(std::move(c));
        }
      }
      if (!push_l.empty() || !push_r.empty()) {
        if (!push_l.empty())
          n.inputs[0] = wrap_filter(std::move(n.inputs[0]), std::move(push_l));
        if (!push_r.empty())
          n.inputs[1] = wrap_filter(std::move(n.inputs[1]), std::move(push_r));
        n.exprs[0] = keep.empty() ? bool_literal(true)
                                  : make_conjunction(std::move(keep));
        return true;
      }
    }
  }

  if (n.op != Opcode::Filter) return false;
  Plan& input = n.inputs[0];
  switch (input.op) {
    case Opcode::Filter: {
      // merge stacked filters
      std::vector<RotNode> parts = conjuncts_of(n.exprs[0]);
      for (RotNode& c : conjuncts_of(input.exprs[0]))
        parts.push_back(std::move(c));
      Plan inner = std::move(input.inputs[0]);
      n.exprs[0] = make_conjunction(std::move(parts));
      n.inputs[0] = std::move(inner);
      return true;
    }
    case Opcode::Sort: {
      // filter commutes with sorting
      Plan sort = std::move(input);
      Plan filter;
      filter.op = Opcode::Filter;
      filter.exprs = std::move(n.exprs);
      filter.inputs.push_back(std::move(sort.inputs[0]));
      sort.inputs[0] = std::move(filter);
      n = std::move(sort);
      return true;
    }
    case Opcode::JoinInner:
    case Opcode::JoinLeft:
    case Opcode::JoinRight: {
      std::set<std::string> left, right;
      produced_prefixes(input.inputs[0], left);
      produced_prefixes(input.inputs[1], right);
      const bool can_l = input.op != Opcode::JoinRight;
      const bool can_r = input.op != Opcode::JoinLeft;
      std::vector<RotNode> keep, push_l, push_r;
      for (RotNode& c : conjuncts_of(n.exprs[0])) {
        std::set<std::string> cols;
        collect_columns(c, cols);
        bool all_l = !cols.empty(), all_r = !cols.empty();
        for (const std::string& col : cols) {
          const std::string pre = column_prefix(col);
          all_l = all_l && left.count(pre) && !right.count(pre);
          all_r = all_r && right.count(pre) && !left.count(pre);
        }
        if (contains_subquery(c)) {
          keep.push_back(std::move(c));
        } else if (all_l && can_l) {
          push_l.push_back(std::move(c));
        } else if (all_r && can_r) {
          push_r.push_back(std::move(c));
        } else {
          keep.push_back(std::move(c));
        }
      }
      if (push_l.empty() && push_r.empty()) return false;
      if (!push_l.empty())
        input.inputs[0] =
            wrap_filter(std::move(input.inputs[0]), std::move(push_l));
      if (!push_r.empty())
        input.inputs[1] =
            wrap_filter(std::move(input.inputs[1]), std::move(push_r));
      if (keep.empty()) {
        Plan join = std::move(input);
        n = std::move(join);
      } else {
        n.exprs[0] = make_conjunction(std::move(keep));
      }
      return true;
    }
    case Opcode::Project: {
      // Push below a projection when every referenced column passes through.
      std::set<std::string> pass;
      for (const RotNode& e : input.exprs)
        if (e.content && e.ck == ContentKind::Column) pass.insert(e.text);
      std::vector<RotNode> keep, push;
      for (RotNode& c : conjuncts_of(n.exprs[0])) {
        std::set<std::string> cols;
        collect_columns(c, cols);
        bool ok = !contains_subquery(c);
        for (const std::string& col : cols) ok = ok && pass.count(col) > 0;
        if (ok && !cols.empty())
          push.push_back(std::move(c));
        else
          keep.push_back(std::move(c));
      }
      if (push.empty()) return false;
      Plan proj = std::move(input);
      proj.inputs[0] = wrap_filter(std::move(proj.inputs[0]), std::move(push));
      if (keep.empty()) {
        n = std::move(proj);
      } else {
        n.exprs[0] = make_conjunction(std::move(keep));
        n.inputs[0] = std::move(proj);
      }
      return true;
    }
    case Opcode::HashAggregate: {
      // Conjuncts over group keys filter before aggregation.
      std::set<std::string> keys;
      for (const RotNode& e : input.exprs)
        if (e.content && e.ck == ContentKind::Column) keys.insert(e.text);
      std::vector<RotNode> keep, push;
      for (RotNode& c : conjuncts_of(n.exprs[0])) {
        std::set<std::string> cols;
        collect_columns(c, cols);
        bool ok = !cols.empty() && !contains_subquery(c);
        for (const std::string& col : cols) ok = ok && keys.count(col) > 0;
        if (ok)
          push.push_back(std::move(c));
        else
          keep.push_back(std::move(c));
      }
      if (push.empty()) return false;
      Plan agg = std::move(input);
      agg.inputs[0] = wrap_filter(std::move(agg.inputs[0]), std::move(push));
      if (keep.empty()) {
        n = std::move(agg);
      } else {
        n.exprs[0] = make_conjunction(std::move(keep));
        n.inputs[0] = std::move(agg);
      }
      return true;
    }
    default:
      return false;
  }
}

// -- column_prune ------------------------------------------------------------

// Identity projections re-emit their input's outputs unchanged; they belong
// to redundant_clause_elim, so pruning leaves them alone.
bool is_identity_project(const Plan& p) {
  if (p.op != Opcode::Project) return false;
  std::vector<RotNode> outs = plan_outputs(p.inputs[0]);
  if (outs.empty() || outs.size() != p.exprs.size()) return false;
  for (std::size_t i = 0; i < outs.size(); ++i)
    if (!rot_structural_eq(outs[i], p.exprs[i])) return false;
  return true;
}

void prune_walk(Plan& p, const std::set<std::string>* needed, bool& changed);

bool rule_column_prune(Plan& p) {
  bool changed = false;
  prune_walk(p, nullptr, changed);
  // subquery plans keep all their outputs
  std::function<void(RotNode&)> into_subs = [&](RotNode& e) {
    if (!e.content && e.op == Opcode::Subquery) {
      Plan sub = unflatten_sequence(e.children);
      bool sub_changed = false;
      prune_walk(sub, nullptr, sub_changed);
      if (sub_changed) {
        e.children.clear();
        flatten_plan(sub, e.children);
        changed = true;
      }
      return;
    }
    for (RotNode& c : e.children) into_subs(c);
  };
  std::function<void(Plan&)> expr_scan = [&](Plan& n) {
    for (RotNode& e : n.exprs) into_subs(e);
    for (Plan& in : n.inputs) expr_scan(in);
  };
  expr_scan(p);
  return changed;
}

void collect_expr_columns(const std::vector<RotNode>& exprs,
                          std::set<std::string>& out) {
  for (const RotNode& e : exprs) collect_columns(e, out);
}

void prune_walk(Plan& p, const std::set<std::string>* needed, bool& changed) {
  switch (p.op) {
    case Opcode::Project: {
      if (needed && !is_identity_project(p)) {
        std::vector<RotNode> kept;
        for (RotNode& e : p.exprs) {
          const std::string name = output_name(e);
          if (name.empty() || needed->count(name))
            kept.push_back(std::move(e));
        }
        if (kept.empty()) kept.push_back(std::move(p.exprs[0]));
        if (kept.size() != p.exprs.size()) changed = true;
        p.exprs = std::move(kept);
      }
      std::set<std::string> next;
      collect_expr_columns(p.exprs, next);
      prune_walk(p.inputs[0], &next, changed);
      return;
    }
    case Opcode::Filter:
    case Opcode::Sort: {
      std::set<std::string> next;
      if (needed) next = *needed;
      collect_expr_columns(p.exprs, next);
      prune_walk(p.inputs[0], needed ? &next : nullptr, changed);
      return;
    }
    case Opcode::Limit:
      prune_walk(p.inputs[0], needed, changed);
      return;
    case Opcode::HashAggregate: {
      std::set<std::string> next;
      collect_expr_columns(p.exprs, next);
      prune_walk(p.inputs[0], &next, changed);
      return;
    }
    case Opcode::JoinInner:
    case Opcode::JoinLeft:
    case Opcode::JoinRight:
    case Opcode::JoinFull: {
      std::set<std::string> next;
      if (needed) next = *needed;
      collect_expr_columns(p.exprs, next);
      prune_walk(p.inputs[0], needed ? &next : nullptr, changed);
      prune_walk(p.inputs[1], needed ? &next : nullptr, changed);
      return;
    }
    case Opcode::Union:
    case Opcode::Intersect:
    case Opcode::Minus:
      prune_walk(p.inputs[0], nullptr, changed);
      prune_walk(p.inputs[1], nullptr, changed);
      return;
    default:
      return;  // TableScan, Values
  }
}

// -- redundant_clause_elim ---------------------------------------------------

bool is_set_op(Opcode op) {
  return op == Opcode::Union || op == Opcode::Intersect || op == Opcode::Minus;
}

bool all_column_contents(const std::vector<RotNode>& exprs) {
  for (const RotNode& e : exprs)
    if (!e.content || e.ck != ContentKind::Column) return false;
  return true;
}

bool rule_redundant_elim(Plan& p) {
  return walk_plan(p, [](Plan& n) {
    bool changed = false;
    if (n.op == Opcode::Filter && is_literal(n.exprs[0], "true")) {
      Plan input = std::move(n.inputs[0]);
      n = std::move(input);
      return true;
    }
    if (n.op == Opcode::Sort && n.inputs[0].op == Opcode::Sort) {
      // the inner ordering is immediately re-established by the outer sort
      Plan inner = std::move(n.inputs[0].inputs[0]);
      n.inputs[0] = std::move(inner);
      changed = true;
    }
    // Identity projections are dropped only from a consumer's input slot:
    // the root projection pins the query's output column order and set-op
    // branches pin their branch order, so neither is touched.
    if (!is_set_op(n.op)) {
      for (Plan& input : n.inputs) {
        while (input.op == Opcode::Project) {
          if (is_identity_project(input)) {
            Plan below = std::move(input.inputs[0]);
            input = std::move(below);
            changed = true;
            continue;
          }
          // duplicate of a directly consuming projection
          if (n.op == Opcode::Project && input.exprs.size() == n.exprs.size() &&
              all_column_contents(n.exprs)) {
            bool same = true;
            for (std::size_t i = 0; i < n.exprs.size(); ++i)
              if (!rot_structural_eq(n.exprs[i], input.exprs[i])) {
                same = false;
                break;
              }
            if (same) {
              Plan below = std::move(input.inputs[0]);
              input = std::move(below);
              changed = true;
              continue;
            }
          }
          break;
        }
      }
    }
    return changed;
  });
}

// -- operator_reorder --------------------------------------------------------

bool reorder_expr(RotNode& n) {
  if (n.content) return false;
  bool changed = false;
  for (RotNode& c : n.children) changed |= reorder_expr(c);
  switch (n.op) {
    case Opcode::Lt:
      n.op = Opcode::Gt;
      std::swap(n.children[0], n.children[1]);
      changed = true;
      break;
    case Opcode::Le:
      n.op = Opcode::Ge;
      std::swap(n.children[0], n.children[1]);
      changed = true;
      break;
    case Opcode::Eq:
    case Opcode::Ne: {
      if (rot_serialize(n.children[0]) > rot_serialize(n.children[1])) {
        std::swap(n.children[0], n.children[1]);
        changed = true;
      }
      break;
    }
    case Opcode::And:
    case Opcode::Or: {
      std::vector<std::string> keys;
      for (const RotNode& c : n.children) keys.push_back(rot_serialize(c));
      if (!std::is_sorted(keys.begin(), keys.end())) {
        std::vector<std::size_t> idx(n.children.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) {
                           return keys[a] < keys[b];
                         });
        std::vector<RotNode> sorted;
        for (std::size_t i : idx) sorted.push_back(std::move(n.children[i]));
        n.children = std::move(sorted);
        changed = true;
      }
      break;
    }
    default:
      break;
  }
  return changed;
}

std::string plan_sort_key(const Plan& p) {
  std::vector<RotNode> seq;
  flatten_plan(p, seq);
  std::string key;
  for (const RotNode& n : seq) key += rot_serialize(n);
  return key;
}

bool rule_operator_reorder(Plan& p) {
  return walk_plan(p, [](Plan& n) {
    bool changed = false;
    for (RotNode& e : n.exprs) changed |= reorder_expr(e);
    if (n.op == Opcode::JoinInner || n.op == Opcode::Union ||
        n.op == Opcode::Intersect) {
      if (plan_sort_key(n.inputs[0]) > plan_sort_key(n.inputs[1])) {
        std::swap(n.inputs[0], n.inputs[1]);
        changed = true;
      }
    }
    if (n.op == Opcode::HashAggregate) {
      // group keys are order-free; aggregate calls are inlined by consumers,
      // so both sort into a canonical order
      std::vector<std::string> keys;
      for (const RotNode& e : n.exprs) keys.push_back(rot_serialize(e));
      if (!std::is_sorted(keys.begin(), keys.end())) {
        std::vector<std::size_t> idx(n.exprs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(
            idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
        std::vector<RotNode> sorted;
        for (std::size_t i : idx) sorted.push_back(std::move(n.exprs[i]));
        n.exprs = std::move(sorted);
        changed = true;
      }
    }
    return changed;
  });
}

bool apply_rule(Plan& plan, RuleId id) {
  switch (id) {
    case RuleId::ConstantFold: return rule_constant_fold(plan);
    case RuleId::PredicatePushdown: return rule_predicate_pushdown(plan);
    case RuleId::ColumnPrune: return rule_column_prune(plan);
    case RuleId::RedundantClauseElim: return rule_redundant_elim(plan);
    case RuleId::OperatorReorder: return rule_operator_reorder(plan);
  }
  return false;
}

}  // namespace

RuleSet RuleSet::default_set() {
  RuleSet rs;
  rs.rules = {RuleId::ConstantFold, RuleId::PredicatePushdown,
              RuleId::ColumnPrune, RuleId::RedundantClauseElim,
              RuleId::OperatorReorder};
  return rs;
}

RuleSet RuleSet::single(RuleId id, int max_passes) {
  RuleSet rs;
  rs.rules = {id};
  rs.max_passes = max_passes;
  return rs;
}

Rot canonicalize(const Rot& rot, const RuleSet& rules) {
  validate_rot(rot);
  Plan plan = unflatten_sequence(rot.root.children);
  bool changed_last_pass = true;
  for (int pass = 0; pass < rules.max_passes; ++pass) {
    bool changed = false;
    for (RuleId id : rules.rules) {
      if (apply_rule(plan, id)) {
        changed = true;
        validate_rot(plan_to_rot(plan));
      }
    }
    if (!changed) {
      changed_last_pass = false;
      break;
    }
  }
  if (changed_last_pass) throw FixpointNotReached(rules.max_passes);
  return plan_to_rot(plan);
}

}  // namespace sqlfunc
