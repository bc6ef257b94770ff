#include "sqlfunc/resolve.hpp"

#include <map>
#include <string>
#include <vector>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

namespace {

struct OutputCol {
  std::string name;  // addressable name ("" if the item has none)
  AstNode::Binding binding;
};

struct Source {
  std::string key;       // alias if given, else table name
  std::string instance;  // scan instance ("student", "student#2", subq alias)
  const Table* table = nullptr;        // null for subqueries
  std::vector<OutputCol> outputs;
};

struct Scope {
  std::vector<Source> sources;
  const Scope* parent = nullptr;
};

class Resolver {
 public:
  explicit Resolver(const Schema& schema) : schema_(schema) {}

  std::vector<OutputCol> resolve_stmt(AstNode& stmt, const Scope* parent) {
    if (stmt.kind == AstKind::SetOp) return resolve_setop(stmt, parent);
    return resolve_select(stmt, parent);
  }

 private:
  std::string next_instance(const std::string& base) {
    int n = ++instance_count_[base];
    if (n == 1) return base;
    return base + "#" + std::to_string(n);
  }

  void register_sources(AstNode& n, Scope& scope) {
    switch (n.kind) {
      case AstKind::TableRef: {
        const Table* t = schema_.find_table(n.name);
        if (!t) throw UnknownTable(n.name);
        Source s;
        s.key = n.alias.empty() ? n.name : n.alias;
        s.instance = next_instance(n.name);
        s.table = t;
        for (const Column& c : t->columns)
          s.outputs.push_back(OutputCol{c.name, {s.instance, c.name}});
        n.binding = AstNode::Binding{s.instance, ""};
        scope.sources.push_back(std::move(s));
        break;
      }
      case AstKind::Subquery: {
        Source s;
        std::string inst =
            n.alias.empty() ? next_instance("subq") : n.alias;
        // The inner statement may correlate with the enclosing scope.
        std::vector<OutputCol> inner = resolve_stmt(n.children[0], scope.parent);
        for (OutputCol& oc : inner)
          if (oc.binding.instance.empty()) oc.binding.instance = inst;
        s.key = inst;
        s.instance = inst;
        s.outputs = std::move(inner);
        n.binding = AstNode::Binding{inst, ""};
        scope.sources.push_back(std::move(s));
        break;
      }
      case AstKind::JoinClause:
        register_sources(n.children[0], scope);
        register_sources(n.children[1], scope);
        break;
      default:
        throw LoweringError("unexpected FROM element");
    }
  }

  void resolve_join_conditions(AstNode& n, const Scope& scope) {
    if (n.kind != AstKind::JoinClause) return;
    resolve_join_conditions(n.children[0], scope);
    resolve_join_conditions(n.children[1], scope);
    if (n.children.size() > 2) resolve_expr(n.children[2], scope);
  }

  const Source* find_source(const Scope& scope, const std::string& key) const {
    for (const Scope* s = &scope; s; s = s->parent)
      for (const Source& src : s->sources)
        if (src.key == key) return &src;
    return nullptr;
  }

  void resolve_column(AstNode& col, const Scope& scope) {
    if (!col.qualifier.empty()) {
      const Source* src = find_source(scope, col.qualifier);
      if (!src) throw UnknownTable(col.qualifier);
      for (const OutputCol& oc : src->outputs) {
        if (oc.name == col.name) {
          col.binding = oc.binding;
          return;
        }
      }
      throw UnknownColumn(col.qualifier + "." + col.name);
    }
    // Unqualified: search scopes from the innermost outward; a name visible
    // in more than one source of the same scope is ambiguous.
    for (const Scope* s = &scope; s; s = s->parent) {
      std::vector<const Source*> hits;
      for (const Source& src : s->sources)
        for (const OutputCol& oc : src.outputs)
          if (oc.name == col.name) {
            hits.push_back(&src);
            break;
          }
      if (hits.size() > 1) {
        std::vector<std::string> cands;
        for (const Source* h : hits) cands.push_back(h->key + "." + col.name);
        throw AmbiguousColumn(col.name, cands);
      }
      if (hits.size() == 1) {
        for (const OutputCol& oc : hits[0]->outputs)
          if (oc.name == col.name) {
            col.binding = oc.binding;
            return;
          }
      }
    }
    throw UnknownColumn(col.name);
  }

  void resolve_expr(AstNode& e, const Scope& scope) {
    switch (e.kind) {
      case AstKind::ColumnRef:
        resolve_column(e, scope);
        return;
      case AstKind::Star:
        if (!e.qualifier.empty() && !find_source(scope, e.qualifier))
          throw UnknownTable(e.qualifier);
        return;
      case AstKind::Subquery:
        resolve_stmt(e.children[0], &scope);
        return;
      default:
        for (AstNode& c : e.children) resolve_expr(c, scope);
    }
  }

  // ORDER BY / GROUP BY / HAVING may reference select aliases and (for
  // ORDER BY / GROUP BY) 1-based select positions.
  void resolve_key_expr(AstNode& e, const Scope& scope,
                        const std::vector<AstNode>& select_items,
                        bool allow_positional) {
    if (allow_positional && e.kind == AstKind::Literal &&
        e.lit == LiteralKind::Number &&
        e.name.find_first_not_of("0123456789") == std::string::npos) {
      std::size_t idx = std::stoul(e.name);
      if (idx < 1 || idx > select_items.size())
        throw UnknownColumn("position " + e.name);
      AstNode copy = select_items[idx - 1];
      copy.alias.clear();
      e = std::move(copy);
      return;
    }
    if (e.kind == AstKind::ColumnRef && !e.qualifier.empty()) {
      resolve_column(e, scope);
      return;
    }
    if (e.kind == AstKind::ColumnRef) {
      try {
        resolve_column(e, scope);
        return;
      } catch (const UnknownColumn&) {
        for (const AstNode& item : select_items) {
          std::string name = item.alias;
          if (name.empty() && item.kind == AstKind::ColumnRef) name = item.name;
          if (!name.empty() && name == e.name) {
            AstNode copy = item;
            copy.alias.clear();
            e = std::move(copy);
            return;
          }
        }
        throw;
      }
    }
    for (AstNode& c : e.children)
      resolve_key_expr(c, scope, select_items, false);
  }

  std::vector<OutputCol> resolve_select(AstNode& stmt, const Scope* parent) {
    Scope scope;
    scope.parent = parent;
    AstNode* select_list = nullptr;
    AstNode* from = nullptr;
    for (AstNode& c : stmt.children) {
      if (c.kind == AstKind::SelectList) select_list = &c;
      if (c.kind == AstKind::FromItem) from = &c;
    }
    if (from) {
      register_sources(from->children[0], scope);
      resolve_join_conditions(from->children[0], scope);
    }
    for (AstNode& c : stmt.children) {
      if (c.kind == AstKind::WhereClause) resolve_expr(c.children[0], scope);
    }
    for (AstNode& item : select_list->children) resolve_expr(item, scope);

    const std::vector<AstNode>& items = select_list->children;
    for (AstNode& c : stmt.children) {
      switch (c.kind) {
        case AstKind::GroupBy:
          for (AstNode& k : c.children) resolve_key_expr(k, scope, items, true);
          break;
        case AstKind::Having:
          resolve_key_expr(c.children[0], scope, items, false);
          break;
        case AstKind::OrderBy:
          resolve_key_expr(c.children[0], scope, items, true);
          break;
        default:
          break;
      }
    }

    // Output columns for consumption by an enclosing FROM subquery.
    std::vector<OutputCol> outputs;
    for (const AstNode& item : items) {
      if (item.kind == AstKind::Star) {
        for (const Source& src : scope.sources) {
          if (!item.qualifier.empty() && src.key != item.qualifier) continue;
          for (const OutputCol& oc : src.outputs) outputs.push_back(oc);
        }
        continue;
      }
      OutputCol oc;
      if (!item.alias.empty()) {
        oc.name = item.alias;
      } else if (item.kind == AstKind::ColumnRef) {
        oc.name = item.name;
      }
      if (item.kind == AstKind::ColumnRef && item.binding) {
        oc.binding = *item.binding;  // pass-through keeps the base binding
      } else {
        oc.binding = AstNode::Binding{"", oc.name};  // patched by caller
      }
      outputs.push_back(std::move(oc));
    }
    return outputs;
  }

  std::vector<OutputCol> resolve_setop(AstNode& stmt, const Scope* parent) {
    std::vector<OutputCol> left = resolve_stmt(stmt.children[0], parent);
    resolve_stmt(stmt.children[1], parent);
    // Tail ORDER BY of a compound resolves against the first branch outputs.
    for (std::size_t i = 2; i < stmt.children.size(); ++i) {
      AstNode& c = stmt.children[i];
      if (c.kind != AstKind::OrderBy) continue;
      AstNode& key = c.children[0];
      if (key.kind == AstKind::Literal && key.lit == LiteralKind::Number) {
        std::size_t idx = std::stoul(key.name);
        if (idx < 1 || idx > left.size())
          throw UnknownColumn("position " + key.name);
        AstNode col;
        col.kind = AstKind::ColumnRef;
        col.name = left[idx - 1].name;
        col.binding = left[idx - 1].binding;
        key = std::move(col);
      } else if (key.kind == AstKind::ColumnRef) {
        bool found = false;
        for (const OutputCol& oc : left)
          if (oc.name == key.name) {
            key.binding = oc.binding;
            found = true;
            break;
          }
        if (!found) throw UnknownColumn(key.name);
      }
    }
    // A compound's rows come from either branch, so its outputs are opaque
    // to the enclosing query: keep the first branch's names but mark the
    // bindings synthetic (the caller fills in the subquery instance).
    std::vector<OutputCol> outputs;
    for (const OutputCol& oc : left)
      outputs.push_back(OutputCol{oc.name, {"", oc.name}});
    return outputs;
  }

  const Schema& schema_;
  std::map<std::string, int> instance_count_;
};

}  // namespace

SqlAst resolve_names(const SqlAst& ast, const Schema& schema) {
  SqlAst copy = ast;
  Resolver r(schema);
  r.resolve_stmt(copy.root, nullptr);
  return copy;
}

}  // namespace sqlfunc
