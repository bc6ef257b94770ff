#pragma once

#include <vector>

#include "sqlfunc/rot.hpp"

namespace sqlfunc {

enum class RuleId {
  ConstantFold,
  PredicatePushdown,
  ColumnPrune,
  RedundantClauseElim,
  OperatorReorder,
};

struct RuleSet {
  std::vector<RuleId> rules;
  int max_passes = 10;

  /// fold -> pushdown -> prune -> redundant-elim -> reorder.
  /// Folding first exposes pushdown opportunities.
  static RuleSet default_set();
  static RuleSet single(RuleId id, int max_passes = 10);
};

/// Applies the rules round-robin until a full pass leaves the tree
/// unchanged. Validates the tree after every rule application. Throws
/// FixpointNotReached if the tree is still changing after max_passes.
Rot canonicalize(const Rot& rot, const RuleSet& rules = RuleSet::default_set());

}  // namespace sqlfunc
