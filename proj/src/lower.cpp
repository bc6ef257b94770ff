#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "plan_internal.hpp"
#include "sqlfunc/errors.hpp"
#include "sqlfunc/rot.hpp"

namespace sqlfunc {

namespace {

bool is_integral_text(const std::string& s) {
  std::size_t i = (s.size() > 1 && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

std::string canonical_number(const std::string& text) {
  if (is_integral_text(text)) {
    long long v = 0;
    auto [p, ec] = std::from_chars(text.data() + (text[0] == '+' ? 1 : 0),
                                   text.data() + text.size(), v);
    if (ec == std::errc()) return std::to_string(v);
    return text;
  }
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc()) return text;
  char buf[32];
  auto [q, ec2] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, q);
}

RotNode column_content(const AstNode& col) {
  if (!col.binding) throw LoweringError("unbound column: " + col.name);
  return RotNode::make_content(ContentKind::Column, col.binding->text());
}

RotNode marker(const std::string& text) {
  return RotNode::make_content(ContentKind::Marker, text);
}

bool is_aggregate_name(const std::string& name) {
  return name == "count" || name == "sum" || name == "avg" || name == "min" ||
         name == "max";
}

Opcode aggregate_opcode(const std::string& name) {
  if (name == "count") return Opcode::Count;
  if (name == "sum") return Opcode::Sum;
  if (name == "avg") return Opcode::Avg;
  if (name == "min") return Opcode::Min;
  return Opcode::Max;
}

class Lowerer {
 public:
  explicit Lowerer(const Schema& schema) : schema_(schema) {}

  Plan lower_stmt(const AstNode& stmt) {
    if (stmt.kind == AstKind::SetOp) return lower_setop(stmt);
    return lower_select(stmt);
  }

 private:
  // One FROM source visible for star expansion.
  struct StarSource {
    std::string key;
    std::vector<RotNode> outputs;
  };

  Plan lower_setop(const AstNode& stmt) {
    Plan p;
    if (stmt.op == "union") p.op = Opcode::Union;
    else if (stmt.op == "intersect") p.op = Opcode::Intersect;
    else p.op = Opcode::Minus;
    p.inputs.push_back(lower_stmt(stmt.children[0]));
    p.inputs.push_back(lower_stmt(stmt.children[1]));
    p.exprs.push_back(marker(stmt.flag ? "all" : "distinct"));
    return apply_tail(std::move(p), stmt);
  }

  // ORDER BY / LIMIT children shared by plain and compound statements.
  Plan apply_tail(Plan p, const AstNode& stmt) {
    std::vector<RotNode> keys;
    for (const AstNode& c : stmt.children) {
      if (c.kind != AstKind::OrderBy) continue;
      std::vector<RotNode> kids;
      kids.push_back(lower_expr(c.children[0]));
      kids.push_back(marker(c.direction == "desc" ? "DESC" : "ASC"));
      std::string nulls = c.nulls_order;
      if (nulls.empty()) nulls = c.direction == "desc" ? "last" : "first";
      kids.push_back(marker(nulls == "last" ? "LAST" : "FIRST"));
      keys.push_back(RotNode::computing(Opcode::SortKey, std::move(kids)));
    }
    if (!keys.empty()) {
      Plan sort;
      sort.op = Opcode::Sort;
      sort.exprs = std::move(keys);
      sort.inputs.push_back(std::move(p));
      p = std::move(sort);
    }
    for (const AstNode& c : stmt.children) {
      if (c.kind != AstKind::Limit) continue;
      Plan lim;
      lim.op = Opcode::Limit;
      lim.exprs.push_back(RotNode::make_content(
          ContentKind::Literal, canonical_number(c.children[0].name)));
      lim.inputs.push_back(std::move(p));
      p = std::move(lim);
    }
    return p;
  }

  Plan lower_select(const AstNode& stmt) {
    const AstNode* select_list = nullptr;
    const AstNode* from = nullptr;
    const AstNode* where = nullptr;
    const AstNode* group = nullptr;
    const AstNode* having = nullptr;
    for (const AstNode& c : stmt.children) {
      switch (c.kind) {
        case AstKind::SelectList: select_list = &c; break;
        case AstKind::FromItem: from = &c; break;
        case AstKind::WhereClause: where = &c; break;
        case AstKind::GroupBy: group = &c; break;
        case AstKind::Having: having = &c; break;
        default: break;
      }
    }

    std::vector<StarSource> sources;
    Plan p;
    if (from) {
      p = lower_from(from->children[0], sources);
    } else {
      p.op = Opcode::Values;
      p.exprs.push_back(marker("unit"));
    }

    if (where) {
      Plan f;
      f.op = Opcode::Filter;
      f.exprs.push_back(lower_expr(where->children[0]));
      f.inputs.push_back(std::move(p));
      p = std::move(f);
    }

    // Aggregation: GROUP BY keys plus every aggregate call appearing in the
    // select list, HAVING or ORDER BY, deduplicated in appearance order.
    std::vector<RotNode> keys;
    if (group)
      for (const AstNode& k : group->children) keys.push_back(lower_expr(k));
    std::vector<RotNode> aggs;
    std::set<std::string> seen;
    auto collect = [&](const AstNode& e) {
      collect_aggregates(e, aggs, seen);
    };
    for (const AstNode& item : select_list->children) collect(item);
    if (having) collect(having->children[0]);
    for (const AstNode& c : stmt.children)
      if (c.kind == AstKind::OrderBy) collect(c.children[0]);

    if (!keys.empty() || !aggs.empty()) {
      Plan agg;
      agg.op = Opcode::HashAggregate;
      agg.exprs = std::move(keys);
      for (RotNode& a : aggs) agg.exprs.push_back(std::move(a));
      agg.inputs.push_back(std::move(p));
      p = std::move(agg);
    }

    if (having) {
      Plan f;
      f.op = Opcode::Filter;
      f.exprs.push_back(lower_expr(having->children[0]));
      f.inputs.push_back(std::move(p));
      p = std::move(f);
    }

    // Select-list expressions, with stars expanded in schema order.
    std::vector<RotNode> items;
    for (const AstNode& item : select_list->children) {
      if (item.kind == AstKind::Star) {
        bool any = false;
        for (const StarSource& s : sources) {
          if (!item.qualifier.empty() && s.key != item.qualifier) continue;
          for (const RotNode& oc : s.outputs) items.push_back(oc);
          any = true;
        }
        if (!any) throw LoweringError("star with no sources");
        continue;
      }
      items.push_back(lower_expr(item));
    }

    if (stmt.flag) {  // SELECT DISTINCT == aggregate on the projected rows
      Plan d;
      d.op = Opcode::HashAggregate;
      d.exprs = items;
      d.inputs.push_back(std::move(p));
      p = std::move(d);
    }

    p = apply_tail(std::move(p), stmt);

    Plan proj;
    proj.op = Opcode::Project;
    proj.exprs = std::move(items);
    proj.inputs.push_back(std::move(p));
    return proj;
  }

  Plan lower_from(const AstNode& n, std::vector<StarSource>& sources) {
    switch (n.kind) {
      case AstKind::TableRef: {
        const Table* t = schema_.find_table(n.name);
        if (!t || !n.binding) throw LoweringError("unresolved table " + n.name);
        const std::string& inst = n.binding->instance;
        Plan p;
        p.op = Opcode::TableScan;
        p.exprs.push_back(RotNode::make_content(ContentKind::Table, inst));
        for (const Column& c : t->columns)
          p.exprs.push_back(RotNode::make_content(ContentKind::Column,
                                                  inst + "." + c.name));
        StarSource s;
        s.key = n.alias.empty() ? n.name : n.alias;
        s.outputs.assign(p.exprs.begin() + 1, p.exprs.end());
        sources.push_back(std::move(s));
        return p;
      }
      case AstKind::Subquery: {
        Plan p = lower_stmt(n.children[0]);
        StarSource s;
        s.key = n.binding ? n.binding->instance : n.alias;
        s.outputs = subquery_outputs(n, p);
        sources.push_back(std::move(s));
        return p;
      }
      case AstKind::JoinClause: {
        Plan l = lower_from(n.children[0], sources);
        Plan r = lower_from(n.children[1], sources);
        Plan p;
        if (n.op == "inner" || n.op == "cross") p.op = Opcode::JoinInner;
        else if (n.op == "left") p.op = Opcode::JoinLeft;
        else if (n.op == "right") p.op = Opcode::JoinRight;
        else if (n.op == "full") p.op = Opcode::JoinFull;
        else throw LoweringError("join type " + n.op);
        p.inputs.push_back(std::move(l));
        p.inputs.push_back(std::move(r));
        if (n.children.size() > 2)
          p.exprs.push_back(lower_expr(n.children[2]));
        else
          p.exprs.push_back(RotNode::make_content(ContentKind::Literal, "true"));
        return p;
      }
      default:
        throw LoweringError("unexpected FROM node");
    }
  }

  // Star-visible outputs of a FROM subquery: pass-through columns keep their
  // base binding, computed items are addressed as "<instance>.<name>".
  std::vector<RotNode> subquery_outputs(const AstNode& sub, const Plan& plan) {
    const std::string inst = sub.binding ? sub.binding->instance : sub.alias;
    const AstNode& stmt = sub.children[0];
    const bool compound = stmt.kind == AstKind::SetOp;
    const AstNode* sel = &stmt;
    while (sel->kind == AstKind::SetOp) sel = &sel->children[0];
    const AstNode* list = nullptr;
    for (const AstNode& c : sel->children)
      if (c.kind == AstKind::SelectList) list = &c;
    std::vector<RotNode> named;
    for (const AstNode& item : list->children) {
      if (item.kind == AstKind::Star) {
        if (compound)
          throw LoweringError("star select over a compound subquery");
        return plan_outputs(plan);  // all pass-through, already named
      }
      std::string name = item.alias;
      if (name.empty() && item.kind == AstKind::ColumnRef) name = item.name;
      if (!compound && item.kind == AstKind::ColumnRef && item.binding) {
        named.push_back(
            RotNode::make_content(ContentKind::Column, item.binding->text()));
      } else {
        named.push_back(
            RotNode::make_content(ContentKind::Column, inst + "." + name));
      }
    }
    return named;
  }

  void collect_aggregates(const AstNode& e, std::vector<RotNode>& aggs,
                          std::set<std::string>& seen) {
    if (e.kind == AstKind::FuncCall && is_aggregate_name(e.name)) {
      RotNode low = lower_expr(e);
      std::string key = rot_serialize(low);
      if (seen.insert(key).second) aggs.push_back(std::move(low));
      return;  // no nested aggregates
    }
    if (e.kind == AstKind::Subquery) return;  // inner query aggregates its own
    for (const AstNode& c : e.children) collect_aggregates(c, aggs, seen);
  }

  RotNode lower_expr(const AstNode& e) {
    switch (e.kind) {
      case AstKind::ColumnRef:
        return column_content(e);
      case AstKind::Literal:
        switch (e.lit) {
          case LiteralKind::Number:
            return RotNode::make_content(ContentKind::Literal,
                                         canonical_number(e.name));
          case LiteralKind::String:
            return RotNode::make_content(ContentKind::Literal, e.name);
          case LiteralKind::Null:
            return RotNode::make_content(ContentKind::Literal, "null");
          case LiteralKind::Bool:
            return RotNode::make_content(ContentKind::Literal, e.name);
        }
        break;
      case AstKind::Star:
        return marker("*");
      case AstKind::FuncCall: {
        std::vector<RotNode> args;
        for (const AstNode& a : e.children) args.push_back(lower_expr(a));
        if (is_aggregate_name(e.name)) {
          if (e.flag) {
            std::vector<RotNode> inner = std::move(args);
            args.clear();
            args.push_back(
                RotNode::computing(Opcode::Distinct, std::move(inner)));
          }
          if (args.empty()) throw LoweringError("aggregate without argument");
          return RotNode::computing(aggregate_opcode(e.name), std::move(args));
        }
        std::vector<RotNode> kids;
        kids.push_back(marker(e.name));
        for (RotNode& a : args) kids.push_back(std::move(a));
        return RotNode::computing(Opcode::ScalarFunc, std::move(kids));
      }
      case AstKind::Subquery: {
        Plan sub = lower_stmt(e.children[0]);
        RotNode n = RotNode::computing(Opcode::Subquery);
        flatten_plan(sub, n.children);
        return n;
      }
      case AstKind::UnaryOp: {
        if (e.op == "not")
          return RotNode::computing(Opcode::Not, {lower_expr(e.children[0])});
        if (e.op == "-")
          return RotNode::computing(Opcode::Neg, {lower_expr(e.children[0])});
        if (e.op == "is_null")
          return RotNode::computing(Opcode::IsNull,
                                    {lower_expr(e.children[0])});
        if (e.op == "is_not_null")
          return RotNode::computing(Opcode::IsNotNull,
                                    {lower_expr(e.children[0])});
        if (e.op == "exists")
          return RotNode::computing(Opcode::Exists,
                                    {lower_expr(e.children[0])});
        break;
      }
      case AstKind::BinaryOp:
        return lower_binop(e);
      default:
        break;
    }
    throw LoweringError(std::string("no operator mapping for ") +
                        ast_kind_name(e.kind));
  }

  RotNode lower_binop(const AstNode& e) {
    const std::string& op = e.op;
    if (op == "and" || op == "or") {
      // Flatten left-deep chains into one n-ary node.
      std::vector<RotNode> parts;
      std::function<void(const AstNode&)> gather = [&](const AstNode& n) {
        if (n.kind == AstKind::BinaryOp && n.op == op) {
          gather(n.children[0]);
          gather(n.children[1]);
        } else {
          parts.push_back(lower_expr(n));
        }
      };
      gather(e);
      return RotNode::computing(op == "and" ? Opcode::And : Opcode::Or,
                                std::move(parts));
    }
    if (op == "between") {
      RotNode x = lower_expr(e.children[0]);
      RotNode lo = lower_expr(e.children[1]);
      RotNode hi = lower_expr(e.children[2]);
      RotNode ge = RotNode::computing(Opcode::Ge, {x, std::move(lo)});
      RotNode le = RotNode::computing(Opcode::Le, {std::move(x), std::move(hi)});
      return RotNode::computing(Opcode::And, {std::move(ge), std::move(le)});
    }
    if (op == "in") {
      RotNode lhs = lower_expr(e.children[0]);
      if (e.children.size() == 2 && e.children[1].kind == AstKind::Subquery) {
        return RotNode::computing(Opcode::InSubquery,
                                  {std::move(lhs), lower_expr(e.children[1])});
      }
      std::vector<RotNode> eqs;
      for (std::size_t i = 1; i < e.children.size(); ++i)
        eqs.push_back(RotNode::computing(Opcode::Eq,
                                         {lhs, lower_expr(e.children[i])}));
      if (eqs.size() == 1) return std::move(eqs[0]);
      return RotNode::computing(Opcode::Or, std::move(eqs));
    }
    Opcode o;
    if (op == "=") o = Opcode::Eq;
    else if (op == "<>") o = Opcode::Ne;
    else if (op == "<") o = Opcode::Lt;
    else if (op == "<=") o = Opcode::Le;
    else if (op == ">") o = Opcode::Gt;
    else if (op == ">=") o = Opcode::Ge;
    else if (op == "+") o = Opcode::Add;
    else if (op == "-") o = Opcode::Sub;
    else if (op == "*") o = Opcode::Mul;
    else if (op == "/") o = Opcode::Div;
    else if (op == "%") o = Opcode::Mod;
    else if (op == "like") o = Opcode::Like;
    else throw LoweringError("operator " + op);
    return RotNode::computing(
        o, {lower_expr(e.children[0]), lower_expr(e.children[1])});
  }

  const Schema& schema_;
};

}  // namespace

Rot lower_to_rot(const SqlAst& resolved, const Schema& schema) {
  Lowerer low(schema);
  Plan plan = low.lower_stmt(resolved.root);
  Rot rot = plan_to_rot(plan);
  validate_rot(rot);
  return rot;
}

}  // namespace sqlfunc
