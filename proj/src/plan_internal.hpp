#pragma once

#include <vector>

#include "sqlfunc/rot.hpp"

namespace sqlfunc {

/// Nested relational plan used internally by lowering and the rewrite
/// rules. The public Rot form is its postorder flattening: all relational
/// operators become children of Rels in execution order (inputs before
/// consumers) and keep only their parameter expressions as children.
struct Plan {
  Opcode op = Opcode::Values;
  std::vector<Plan> inputs;
  std::vector<RotNode> exprs;
};

/// Output columns of a plan as expression trees, or an empty vector when
/// they cannot be derived (set operations, Values). TableScan outputs are
/// its column children, so everything is derivable without a schema.
std::vector<RotNode> plan_outputs(const Plan& p);

void flatten_plan(const Plan& p, std::vector<RotNode>& out);
Rot plan_to_rot(const Plan& p);

/// Stack-parses a relational sequence (children of Rels or of a SUBQUERY
/// expression node) back into a nested plan. Throws InvalidRot.
Plan unflatten_sequence(const std::vector<RotNode>& seq);

}  // namespace sqlfunc
