#include <functional>
#include <set>

#include "sqlfunc/errors.hpp"
#include "sqlfunc/harness.hpp"
#include "sqlfunc/parser.hpp"
#include "sqlfunc/resolve.hpp"

namespace sqlfunc {

namespace {

AstNode* find_child(AstNode& stmt, AstKind kind) {
  for (AstNode& c : stmt.children)
    if (c.kind == kind) return &c;
  return nullptr;
}

const AstNode* find_child(const AstNode& stmt, AstKind kind) {
  for (const AstNode& c : stmt.children)
    if (c.kind == kind) return &c;
  return nullptr;
}

// Flattens a left-deep AND chain.
void and_conjuncts(AstNode& e, std::vector<AstNode*>& out) {
  if (e.kind == AstKind::BinaryOp && e.op == "and") {
    and_conjuncts(e.children[0], out);
    and_conjuncts(e.children[1], out);
  } else {
    out.push_back(&e);
  }
}

AstNode rebuild_and(std::vector<AstNode> parts) {
  AstNode acc = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    AstNode conj;
    conj.kind = AstKind::BinaryOp;
    conj.op = "and";
    conj.children.push_back(std::move(acc));
    conj.children.push_back(std::move(parts[i]));
    acc = std::move(conj);
  }
  return acc;
}

void collect_instances(const AstNode& e, std::set<std::string>& out) {
  if (e.kind == AstKind::ColumnRef && e.binding)
    out.insert(e.binding->instance);
  for (const AstNode& c : e.children) collect_instances(c, out);
}

AstNode* first_matching(AstNode& e, const std::function<bool(AstNode&)>& pred) {
  if (pred(e)) return &e;
  for (AstNode& c : e.children)
    if (AstNode* hit = first_matching(c, pred)) return hit;
  return nullptr;
}

bool plain_select(const AstNode& stmt) {
  return stmt.kind == AstKind::SelectStmt && !stmt.flag &&
         !find_child(stmt, AstKind::GroupBy) &&
         !find_child(stmt, AstKind::Having) &&
         !find_child(stmt, AstKind::OrderBy) &&
         !find_child(stmt, AstKind::Limit);
}

// -- positive rewrites -------------------------------------------------------

// SELECT max(c) FROM ... ->  SELECT c FROM ... ORDER BY c DESC LIMIT 1
std::optional<AstNode> rw_max_to_orderby(const AstNode& stmt) {
  if (!plain_select(stmt)) return std::nullopt;
  const AstNode* list = find_child(stmt, AstKind::SelectList);
  if (!list || list->children.size() != 1) return std::nullopt;
  const AstNode& item = list->children[0];
  if (item.kind != AstKind::FuncCall || item.flag) return std::nullopt;
  if (item.name != "max" && item.name != "min") return std::nullopt;
  if (item.children.size() != 1 ||
      item.children[0].kind != AstKind::ColumnRef)
    return std::nullopt;
  if (!find_child(stmt, AstKind::FromItem)) return std::nullopt;
  AstNode out = stmt;
  AstNode* olist = find_child(out, AstKind::SelectList);
  AstNode col = olist->children[0].children[0];
  col.alias.clear();
  olist->children[0] = col;
  AstNode ob;
  ob.kind = AstKind::OrderBy;
  ob.direction = item.name == "max" ? "desc" : "asc";
  ob.children.push_back(col);
  out.children.push_back(std::move(ob));
  AstNode lim;
  lim.kind = AstKind::Limit;
  AstNode one;
  one.kind = AstKind::Literal;
  one.lit = LiteralKind::Number;
  one.name = "1";
  lim.children.push_back(std::move(one));
  out.children.push_back(std::move(lim));
  return out;
}

// SELECT c FROM ... ORDER BY c DESC LIMIT 1 -> SELECT max(c) FROM ...
std::optional<AstNode> rw_orderby_to_agg(const AstNode& stmt) {
  if (stmt.kind != AstKind::SelectStmt || stmt.flag) return std::nullopt;
  if (find_child(stmt, AstKind::GroupBy) || find_child(stmt, AstKind::Having))
    return std::nullopt;
  const AstNode* list = find_child(stmt, AstKind::SelectList);
  const AstNode* limit = find_child(stmt, AstKind::Limit);
  if (!list || list->children.size() != 1 || !limit) return std::nullopt;
  if (limit->children[0].name != "1") return std::nullopt;
  const AstNode& item = list->children[0];
  if (item.kind != AstKind::ColumnRef) return std::nullopt;
  int order_count = 0;
  const AstNode* ob = nullptr;
  for (const AstNode& c : stmt.children)
    if (c.kind == AstKind::OrderBy) {
      ++order_count;
      ob = &c;
    }
  if (order_count != 1) return std::nullopt;
  const AstNode& key = ob->children[0];
  if (key.kind != AstKind::ColumnRef || key.name != item.name ||
      key.qualifier != item.qualifier)
    return std::nullopt;
  AstNode out;
  out.kind = AstKind::SelectStmt;
  for (const AstNode& c : stmt.children) {
    if (c.kind == AstKind::OrderBy || c.kind == AstKind::Limit) continue;
    out.children.push_back(c);
  }
  AstNode* olist = find_child(out, AstKind::SelectList);
  AstNode agg;
  agg.kind = AstKind::FuncCall;
  agg.name = ob->direction == "desc" ? "max" : "min";
  AstNode col = item;
  col.alias.clear();
  agg.children.push_back(std::move(col));
  olist->children[0] = std::move(agg);
  return out;
}

// WHERE p AND q over a join -> single-table conjuncts move into FROM
// subqueries: the pushdown pattern, inverted.
std::optional<AstNode> rw_filter_into_subquery(const AstNode& stmt,
                                               const Schema& schema) {
  if (stmt.kind != AstKind::SelectStmt) return std::nullopt;
  const AstNode* where = find_child(stmt, AstKind::WhereClause);
  const AstNode* from = find_child(stmt, AstKind::FromItem);
  if (!where || !from) return std::nullopt;

  AstNode out = stmt;
  AstNode* owhere = find_child(out, AstKind::WhereClause);
  AstNode* ofrom = find_child(out, AstKind::FromItem);
  std::vector<AstNode*> conjuncts;
  and_conjuncts(owhere->children[0], conjuncts);

  // table instances present as plain TableRefs
  std::vector<AstNode*> tables;
  std::function<void(AstNode&)> scan = [&](AstNode& n) {
    if (n.kind == AstKind::TableRef) tables.push_back(&n);
    if (n.kind == AstKind::JoinClause) {
      scan(n.children[0]);
      scan(n.children[1]);
    }
  };
  scan(ofrom->children[0]);
  if (tables.size() < 2) return std::nullopt;

  // pick conjuncts referencing exactly one first-occurrence table
  bool moved_any = false;
  std::vector<AstNode> kept;
  std::map<std::string, std::vector<AstNode>> moved;  // table name -> conds
  for (AstNode* c : conjuncts) {
    std::set<std::string> inst;
    collect_instances(*c, inst);
    bool movable = inst.size() == 1 && schema.find_table(*inst.begin());
    if (movable) {
      AstNode cond = *c;
      // strip alias qualifiers; inside the subquery the table is bare
      std::function<void(AstNode&)> fix = [&](AstNode& n) {
        if (n.kind == AstKind::ColumnRef) {
          n.qualifier = n.binding ? n.binding->instance : n.qualifier;
          n.binding.reset();
        }
        for (AstNode& ch : n.children) fix(ch);
      };
      fix(cond);
      moved[*inst.begin()].push_back(std::move(cond));
      moved_any = true;
    } else {
      kept.push_back(*c);
    }
  }
  if (!moved_any) return std::nullopt;

  for (AstNode* t : tables) {
    const std::string inst = t->binding ? t->binding->instance : t->name;
    auto it = moved.find(inst);
    if (it == moved.end()) continue;
    AstNode sub;
    sub.kind = AstKind::Subquery;
    sub.alias = t->alias.empty() ? t->name : t->alias;
    AstNode inner;
    inner.kind = AstKind::SelectStmt;
    AstNode ilist;
    ilist.kind = AstKind::SelectList;
    AstNode star;
    star.kind = AstKind::Star;
    ilist.children.push_back(std::move(star));
    inner.children.push_back(std::move(ilist));
    AstNode ifrom;
    ifrom.kind = AstKind::FromItem;
    AstNode itab;
    itab.kind = AstKind::TableRef;
    itab.name = t->name;
    ifrom.children.push_back(std::move(itab));
    inner.children.push_back(std::move(ifrom));
    AstNode iwhere;
    iwhere.kind = AstKind::WhereClause;
    iwhere.children.push_back(rebuild_and(std::move(it->second)));
    inner.children.push_back(std::move(iwhere));
    sub.children.push_back(std::move(inner));
    *t = std::move(sub);
  }

  if (kept.empty()) {
    // drop the WHERE clause entirely
    std::vector<AstNode> rest;
    for (AstNode& c : out.children)
      if (c.kind != AstKind::WhereClause) rest.push_back(std::move(c));
    out.children = std::move(rest);
  } else {
    owhere->children[0] = rebuild_and(std::move(kept));
  }
  return out;
}

// a AND b -> b AND a
std::optional<AstNode> rw_commute_and(const AstNode& stmt) {
  if (stmt.kind != AstKind::SelectStmt) return std::nullopt;
  const AstNode* where = find_child(stmt, AstKind::WhereClause);
  if (!where || where->children[0].op != "and" ||
      where->children[0].kind != AstKind::BinaryOp)
    return std::nullopt;
  AstNode out = stmt;
  AstNode* owhere = find_child(out, AstKind::WhereClause);
  std::vector<AstNode*> parts;
  and_conjuncts(owhere->children[0], parts);
  std::vector<AstNode> reversed;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it)
    reversed.push_back(**it);
  owhere->children[0] = rebuild_and(std::move(reversed));
  return out;
}

// t1 JOIN t2 ON c -> t2 JOIN t1 ON c
std::optional<AstNode> rw_commute_join(const AstNode& stmt) {
  if (stmt.kind != AstKind::SelectStmt) return std::nullopt;
  const AstNode* from = find_child(stmt, AstKind::FromItem);
  if (!from) return std::nullopt;
  const AstNode& tree = from->children[0];
  if (tree.kind != AstKind::JoinClause || tree.op != "inner") return std::nullopt;
  if (tree.children[0].kind != AstKind::TableRef ||
      tree.children[1].kind != AstKind::TableRef)
    return std::nullopt;
  AstNode out = stmt;
  AstNode* ofrom = find_child(out, AstKind::FromItem);
  std::swap(ofrom->children[0].children[0], ofrom->children[0].children[1]);
  return out;
}

// WHERE a AND b on one table -> query-a INTERSECT query-b
std::optional<AstNode> rw_intersect_split(const AstNode& stmt) {
  if (!plain_select(stmt)) return std::nullopt;
  const AstNode* where = find_child(stmt, AstKind::WhereClause);
  const AstNode* from = find_child(stmt, AstKind::FromItem);
  const AstNode* list = find_child(stmt, AstKind::SelectList);
  if (!where || !from || from->children[0].kind != AstKind::TableRef)
    return std::nullopt;
  for (const AstNode& item : list->children)
    if (item.kind != AstKind::ColumnRef && item.kind != AstKind::Star)
      return std::nullopt;
  if (where->children[0].kind != AstKind::BinaryOp ||
      where->children[0].op != "and")
    return std::nullopt;
  AstNode base = stmt;
  AstNode* bwhere = find_child(base, AstKind::WhereClause);
  std::vector<AstNode*> parts;
  and_conjuncts(bwhere->children[0], parts);
  AstNode first = *parts[0];
  std::vector<AstNode> rest;
  for (std::size_t i = 1; i < parts.size(); ++i) rest.push_back(*parts[i]);

  AstNode left = base;
  find_child(left, AstKind::WhereClause)->children[0] = std::move(first);
  AstNode right = base;
  find_child(right, AstKind::WhereClause)->children[0] =
      rebuild_and(std::move(rest));
  AstNode setop;
  setop.kind = AstKind::SetOp;
  setop.op = "intersect";
  setop.children.push_back(std::move(left));
  setop.children.push_back(std::move(right));
  return setop;
}

// -- negative mutations ------------------------------------------------------

bool is_order_cmp(const AstNode& n) {
  return n.kind == AstKind::BinaryOp &&
         (n.op == "<" || n.op == ">" || n.op == "<=" || n.op == ">=");
}

std::optional<AstNode> mut_cmp_flip(const AstNode& stmt) {
  AstNode out = stmt;
  AstNode* where = find_child(out, AstKind::WhereClause);
  if (!where) return std::nullopt;
  AstNode* cmp = first_matching(
      *where, [](AstNode& n) { return is_order_cmp(n); });
  if (!cmp) return std::nullopt;
  if (cmp->op == "<") cmp->op = ">";
  else if (cmp->op == ">") cmp->op = "<";
  else if (cmp->op == "<=") cmp->op = ">=";
  else cmp->op = "<=";
  return out;
}

std::optional<AstNode> mut_strictness(const AstNode& stmt) {
  AstNode out = stmt;
  AstNode* where = find_child(out, AstKind::WhereClause);
  if (!where) return std::nullopt;
  AstNode* cmp = first_matching(
      *where, [](AstNode& n) { return is_order_cmp(n); });
  if (!cmp) return std::nullopt;
  if (cmp->op == "<") cmp->op = "<=";
  else if (cmp->op == "<=") cmp->op = "<";
  else if (cmp->op == ">") cmp->op = ">=";
  else cmp->op = ">";
  return out;
}

// "student#2" -> "student"
std::string instance_base_table(const std::string& instance) {
  std::size_t hash = instance.rfind('#');
  return hash == std::string::npos ? instance : instance.substr(0, hash);
}

std::optional<AstNode> mut_column_swap(const AstNode& stmt,
                                       const Schema& schema, Rng& rng) {
  AstNode out = stmt;
  AstNode* list = find_child(out, AstKind::SelectList);
  if (!list) return std::nullopt;
  for (AstNode& item : list->children) {
    if (item.kind != AstKind::ColumnRef || !item.binding) continue;
    const std::string base = instance_base_table(item.binding->instance);
    const Table* t = schema.find_table(base);
    if (!t) continue;
    const Column* cur = t->find_column(item.binding->column);
    if (!cur) continue;
    std::vector<const Column*> candidates;
    for (const Column& c : t->columns)
      if (c.name != cur->name && c.type == cur->type)
        candidates.push_back(&c);
    if (candidates.empty()) continue;
    const Column* pick = candidates[rng.below(static_cast<int>(candidates.size()))];
    item.name = pick->name;
    item.binding.reset();
    return out;
  }
  return std::nullopt;
}

std::optional<AstNode> mut_agg_swap(const AstNode& stmt) {
  AstNode out = stmt;
  AstNode* list = find_child(out, AstKind::SelectList);
  if (!list) return std::nullopt;
  for (AstNode& item : list->children) {
    AstNode* agg = first_matching(item, [](AstNode& n) {
      return n.kind == AstKind::FuncCall &&
             (n.name == "max" || n.name == "min" || n.name == "sum" ||
              n.name == "avg");
    });
    if (!agg) continue;
    if (agg->name == "max") agg->name = "min";
    else if (agg->name == "min") agg->name = "max";
    else if (agg->name == "sum") agg->name = "avg";
    else agg->name = "sum";
    return out;
  }
  return std::nullopt;
}

std::optional<AstNode> mut_limit_change(const AstNode& stmt) {
  AstNode out = stmt;
  AstNode* limit = find_child(out, AstKind::Limit);
  if (!limit) return std::nullopt;
  long long n = std::stoll(limit->children[0].name);
  limit->children[0].name = std::to_string(n + 1);
  return out;
}

}  // namespace

std::string augment_rule_of(const PairExample& ex) {
  std::size_t pos = ex.id.rfind(':');
  return pos == std::string::npos ? "" : ex.id.substr(pos + 1);
}

bool augment_rule_is_hard(const std::string& rule) {
  return rule == "pos_max_orderby" || rule == "pos_orderby_agg" ||
         rule == "pos_intersect";
}

std::vector<PairExample> generate_augmented_pairs(
    const std::vector<RefQuery>& corpus,
    const std::map<std::string, Schema>& schemas, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PairExample> out;
  int idx = 0;
  for (const RefQuery& ref : corpus) {
    ++idx;
    auto sit = schemas.find(ref.db_id);
    if (sit == schemas.end()) throw MissingSchema(ref.db_id);
    const Schema& schema = sit->second;
    SqlAst resolved;
    try {
      resolved = resolve_names(parse_sql(ref.sql), schema);
    } catch (const Error&) {
      continue;  // unusable reference
    }
    const AstNode& stmt = resolved.root;

    auto emit = [&](const char* rule, const std::optional<AstNode>& rewritten,
                    int label) {
      if (!rewritten) return;
      std::string sql = render_sql(*rewritten);
      try {  // generated text must itself parse and resolve
        resolve_names(parse_sql(sql), schema);
      } catch (const Error&) {
        return;
      }
      PairExample ex;
      ex.id = std::to_string(idx) + ":" + rule;
      ex.db_id = ref.db_id;
      ex.ref_sql = ref.sql;
      ex.gen_sql = std::move(sql);
      ex.label = label;
      out.push_back(std::move(ex));
    };

    emit("pos_max_orderby", rw_max_to_orderby(stmt), 1);
    emit("pos_orderby_agg", rw_orderby_to_agg(stmt), 1);
    emit("pos_filter_subquery", rw_filter_into_subquery(stmt, schema), 1);
    emit("pos_commute_and", rw_commute_and(stmt), 1);
    emit("pos_commute_join", rw_commute_join(stmt), 1);
    emit("pos_intersect", rw_intersect_split(stmt), 1);
    emit("neg_cmp_flip", mut_cmp_flip(stmt), 0);
    emit("neg_strictness", mut_strictness(stmt), 0);
    emit("neg_col_swap", mut_column_swap(stmt, schema, rng), 0);
    emit("neg_agg_swap", mut_agg_swap(stmt), 0);
    emit("neg_limit_change", mut_limit_change(stmt), 0);
  }
  return out;
}

}  // namespace sqlfunc
