#pragma once

#include <string>
#include <vector>

#include "qiup/circuit.hpp"
#include "qiup/elements.hpp"
#include "qiup/state.hpp"

namespace qiup {

struct ExecOptions {
  /// false skips every merge step (which-source information survives).
  bool merge = true;
  BsConvention bs_convention = BsConvention::Symmetric;
  double prune_epsilon = kDefaultPruneEpsilon;
};

struct StepTrace {
  std::string label;
  BiphotonState state;
};

/// Runs a fully bound plan from its initial state. When `trace` is given it
/// receives the initial state followed by the state after each step.
BiphotonState execute(const CircuitPlan& plan, const ExecOptions& options = {},
                      std::vector<StepTrace>* trace = nullptr, Warnings* warnings = nullptr);

}  // namespace qiup
