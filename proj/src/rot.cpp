#include "sqlfunc/rot.hpp"

#include <functional>

#include <json.hpp>

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

namespace {
const char* kOpcodeNames[] = {
    "Rels",       "TableScan", "Project",    "Filter",     "JoinInner",
    "JoinLeft",   "JoinRight", "JoinFull",   "HashAggregate", "Sort",
    "Limit",      "Union",     "Intersect",  "Minus",      "Values",
    "SortKey",    "EQ",        "NE",         "LT",         "LE",
    "GT",         "GE",        "ADD",        "SUB",        "MUL",
    "DIV",        "MOD",       "NEG",        "AND",        "OR",
    "NOT",        "LIKE",      "IN_SUBQUERY", "EXISTS",    "IS_NULL",
    "IS_NOT_NULL", "COUNT",    "SUM",        "AVG",        "MIN",
    "MAX",        "DISTINCT",  "SUBQUERY",   "SCALAR_FUNC"};
static_assert(sizeof(kOpcodeNames) / sizeof(kOpcodeNames[0]) ==
              static_cast<int>(Opcode::kUsed));
}  // namespace

const char* opcode_name(Opcode op) {
  return kOpcodeNames[static_cast<int>(op)];
}

std::optional<Opcode> opcode_from_name(const std::string& name) {
  for (int i = 0; i < static_cast<int>(Opcode::kUsed); ++i)
    if (name == kOpcodeNames[i]) return static_cast<Opcode>(i);
  return std::nullopt;
}

bool opcode_is_relational(Opcode op) {
  switch (op) {
    case Opcode::TableScan:
    case Opcode::Project:
    case Opcode::Filter:
    case Opcode::JoinInner:
    case Opcode::JoinLeft:
    case Opcode::JoinRight:
    case Opcode::JoinFull:
    case Opcode::HashAggregate:
    case Opcode::Sort:
    case Opcode::Limit:
    case Opcode::Union:
    case Opcode::Intersect:
    case Opcode::Minus:
    case Opcode::Values:
      return true;
    default:
      return false;
  }
}

int relational_arity(Opcode op) {
  switch (op) {
    case Opcode::TableScan:
    case Opcode::Values:
      return 0;
    case Opcode::JoinInner:
    case Opcode::JoinLeft:
    case Opcode::JoinRight:
    case Opcode::JoinFull:
    case Opcode::Union:
    case Opcode::Intersect:
    case Opcode::Minus:
      return 2;
    default:
      return 1;  // Project, Filter, HashAggregate, Sort, Limit
  }
}

bool rot_structural_eq(const RotNode& a, const RotNode& b) {
  if (a.content != b.content) return false;
  if (a.content) {
    if (a.text != b.text) return false;
  } else {
    if (a.op != b.op) return false;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!rot_structural_eq(a.children[i], b.children[i])) return false;
  return true;
}

std::size_t rot_size(const RotNode& n) {
  std::size_t c = 1;
  for (const RotNode& ch : n.children) c += rot_size(ch);
  return c;
}

std::string rot_serialize(const RotNode& n) {
  std::string out;
  if (n.content) {
    out = "C" + std::to_string(n.text.size()) + ":" + n.text;
  } else {
    out = "O" + std::to_string(static_cast<int>(n.op));
  }
  if (!n.children.empty()) {
    out += "(";
    for (const RotNode& c : n.children) out += rot_serialize(c);
    out += ")";
  }
  return out;
}

namespace {

void validate_expr(const RotNode& n);

// A relational sequence (the layer-2 children of Rels or the children of a
// SUBQUERY node) must parse with a consistent input stack.
void validate_sequence(const std::vector<RotNode>& seq, const char* where) {
  if (seq.empty()) throw InvalidRot(std::string(where) + ": empty pipeline");
  int stack = 0;
  for (const RotNode& n : seq) {
    if (n.content || !opcode_is_relational(n.op))
      throw InvalidRot(std::string(where) +
                       ": non-relational operator in pipeline: " + n.val());
    int arity = relational_arity(n.op);
    if (stack < arity)
      throw InvalidRot(std::string(where) + ": operator " + n.val() +
                       " lacks inputs");
    stack -= arity;
    stack += 1;
    for (const RotNode& e : n.children) validate_expr(e);
    if (n.children.empty())
      throw InvalidRot(std::string(where) + ": computing node " + n.val() +
                       " has no children");
  }
  if (stack != 1)
    throw InvalidRot(std::string(where) + ": pipeline leaves " +
                     std::to_string(stack) + " results");
}

void validate_expr(const RotNode& n) {
  if (n.content) {
    if (!n.children.empty()) throw InvalidRot("content node with children");
    return;
  }
  if (n.op == Opcode::Rels) throw InvalidRot("nested Rels");
  if (opcode_is_relational(n.op))
    throw InvalidRot("relational operator inside an expression: " +
                     std::string(n.val()));
  if (n.children.empty())
    throw InvalidRot("computing node " + std::string(n.val()) +
                     " has no children");
  if (n.op == Opcode::Subquery) {
    validate_sequence(n.children, "subquery");
    return;
  }
  for (const RotNode& c : n.children) validate_expr(c);
}

}  // namespace

void validate_rot(const Rot& r) {
  if (r.root.content || r.root.op != Opcode::Rels)
    throw InvalidRot("root must be Rels");
  validate_sequence(r.root.children, "root");
}

std::string rot_to_text(const Rot& r) {
  std::string out;
  std::function<void(const RotNode&, int)> walk = [&](const RotNode& n,
                                                      int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (n.content) {
      out += n.text;
      switch (n.ck) {
        case ContentKind::Column: out += " [column]"; break;
        case ContentKind::Table: out += " [table]"; break;
        case ContentKind::Literal: out += " [literal]"; break;
        case ContentKind::Marker: out += " [marker]"; break;
      }
    } else {
      out += opcode_name(n.op);
    }
    out += "\n";
    for (const RotNode& c : n.children) walk(c, depth + 1);
  };
  walk(r.root, 0);
  return out;
}

std::string rot_to_json(const Rot& r, int indent) {
  using nlohmann::json;
  int next_id = 0;
  std::function<json(const RotNode&)> conv = [&](const RotNode& n) {
    json j;
    j["id"] = next_id++;
    if (n.content) {
      j["kind"] = "content";
      j["label"] = n.text;
      switch (n.ck) {
        case ContentKind::Column: j["content_kind"] = "column"; break;
        case ContentKind::Table: j["content_kind"] = "table"; break;
        case ContentKind::Literal: j["content_kind"] = "literal"; break;
        case ContentKind::Marker: j["content_kind"] = "marker"; break;
      }
    } else {
      j["kind"] = "computing";
      j["label"] = opcode_name(n.op);
    }
    if (!n.children.empty()) {
      j["children"] = json::array();
      for (const RotNode& c : n.children) j["children"].push_back(conv(c));
    }
    return j;
  };
  return conv(r.root).dump(indent);
}

}  // namespace sqlfunc
