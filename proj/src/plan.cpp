#include "plan_internal.hpp"

#include "sqlfunc/errors.hpp"

namespace sqlfunc {

std::vector<RotNode> plan_outputs(const Plan& p) {
  switch (p.op) {
    case Opcode::TableScan: {
      std::vector<RotNode> out(p.exprs.begin() + 1, p.exprs.end());
      return out;
    }
    case Opcode::Project:
    case Opcode::HashAggregate:
      return p.exprs;
    case Opcode::Filter:
    case Opcode::Sort:
    case Opcode::Limit:
      return plan_outputs(p.inputs[0]);
    case Opcode::JoinInner:
    case Opcode::JoinLeft:
    case Opcode::JoinRight:
    case Opcode::JoinFull: {
      std::vector<RotNode> l = plan_outputs(p.inputs[0]);
      std::vector<RotNode> r = plan_outputs(p.inputs[1]);
      if (l.empty() || r.empty()) return {};
      l.insert(l.end(), r.begin(), r.end());
      return l;
    }
    default:
      return {};  // set operations, Values
  }
}

void flatten_plan(const Plan& p, std::vector<RotNode>& out) {
  for (const Plan& in : p.inputs) flatten_plan(in, out);
  out.push_back(RotNode::computing(p.op, p.exprs));
}

Rot plan_to_rot(const Plan& p) {
  Rot r;
  r.root = RotNode::computing(Opcode::Rels);
  flatten_plan(p, r.root.children);
  return r;
}

Plan unflatten_sequence(const std::vector<RotNode>& seq) {
  std::vector<Plan> stack;
  for (const RotNode& n : seq) {
    if (n.content || !opcode_is_relational(n.op))
      throw InvalidRot("non-relational node in pipeline: " + n.val());
    Plan p;
    p.op = n.op;
    p.exprs = n.children;
    int arity = relational_arity(n.op);
    if (static_cast<int>(stack.size()) < arity)
      throw InvalidRot("operator " + n.val() + " lacks inputs");
    p.inputs.insert(p.inputs.end(),
                    std::make_move_iterator(stack.end() - arity),
                    std::make_move_iterator(stack.end()));
    stack.erase(stack.end() - arity, stack.end());
    stack.push_back(std::move(p));
  }
  if (stack.size() != 1) throw InvalidRot("pipeline does not reduce to one plan");
  return std::move(stack.front());
}

}  // namespace sqlfunc
