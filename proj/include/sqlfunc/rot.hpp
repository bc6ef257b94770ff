#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqlfunc/ast.hpp"
#include "sqlfunc/schema.hpp"

namespace sqlfunc {

/// Computing-node opcodes. The embedding vocabulary is fixed at
/// kOpcodeSlots entries; unused slots stay reserved so checkpoint indices
/// remain stable when opcodes are added.
enum class Opcode : int {
  Rels = 0,
  TableScan,
  Project,
  Filter,
  JoinInner,
  JoinLeft,
  JoinRight,
  JoinFull,
  HashAggregate,
  Sort,
  Limit,
  Union,
  Intersect,
  Minus,
  Values,
  SortKey,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Neg,
  And,
  Or,
  Not,
  Like,
  InSubquery,
  Exists,
  IsNull,
  IsNotNull,
  Count,
  Sum,
  Avg,
  Min,
  Max,
  Distinct,
  Subquery,
  ScalarFunc,
  kUsed
};

inline constexpr int kOpcodeSlots = 64;

const char* opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(const std::string& name);

/// Relational operators are the ones allowed directly under Rels.
bool opcode_is_relational(Opcode op);
/// Number of relational inputs consumed from the layer-2 sequence.
int relational_arity(Opcode op);

enum class ContentKind { Column, Table, Literal, Marker };

/// One node of a relational operator tree. Computing nodes are internal
/// operators; content nodes are leaves holding parameter text (column
/// bindings "instance.column", table names, literals, markers).
struct RotNode {
  bool content = false;
  Opcode op = Opcode::Rels;
  ContentKind ck = ContentKind::Literal;
  std::string text;
  std::vector<RotNode> children;

  static RotNode computing(Opcode o, std::vector<RotNode> ch = {}) {
    RotNode n;
    n.op = o;
    n.children = std::move(ch);
    return n;
  }
  static RotNode make_content(ContentKind k, std::string t) {
    RotNode n;
    n.content = true;
    n.ck = k;
    n.text = std::move(t);
    return n;
  }
  bool is_leaf() const { return children.empty(); }
  /// Node value compared by the matching algorithms.
  std::string val() const { return content ? text : opcode_name(op); }
};

struct Rot {
  RotNode root;  // always a Rels computing node
};

bool rot_structural_eq(const RotNode& a, const RotNode& b);
inline bool rot_structural_eq(const Rot& a, const Rot& b) {
  return rot_structural_eq(a.root, b.root);
}

std::size_t rot_size(const RotNode& n);

/// Canonical, unambiguous one-line encoding; used as a deterministic sort
/// key by the reorder rule and for memoization.
std::string rot_serialize(const RotNode& n);

/// Structural validity: single Rels root, only relational operators at
/// layer 2 with a consistent input stack, content leaves only, computing
/// nodes internal. Throws InvalidRot.
void validate_rot(const Rot& r);

std::string rot_to_text(const Rot& r);
std::string rot_to_json(const Rot& r, int indent = -1);

/// Lowers a resolved AST (see resolve_names) to its operator tree.
/// Throws LoweringError for constructs without an operator mapping.
Rot lower_to_rot(const SqlAst& resolved, const Schema& schema);

}  // namespace sqlfunc
