#pragma once

#include <limits>
#include <string>
#include <vector>

#include "lowpower/analysis.hpp"

namespace lowpower {

struct OptimizeResult {
  std::vector<Variant> assignment;  // per instance, declaration order
  double leakage_w = 0.0;
  double critical_delay_ns = 0.0;
  int moves_accepted = 0;
  bool feasible = false;
};

inline constexpr double kUnboundedBudget = std::numeric_limits<double>::infinity();
inline constexpr double kDelayIncreaseFloorNs = 1e-6;
inline constexpr int kMaxBruteForceInstances = 16;

/// Greedy delay-constrained leakage minimization. Starts all-conventional and
/// repeatedly flips to stacked the instance with the best leakage saved per
/// critical-delay increase (floored at 1e-6 ns) that keeps the critical delay
/// within budget; ties go to the lowest declaration index. The descent is
/// followed by single-instance exchange moves and compared against a second
/// start from all-stacked; only strict leakage improvements are kept.
/// Infeasible (all-conventional assignment) when the all-conventional
/// critical delay already exceeds the budget.
OptimizeResult optimize_leakage(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                                const Conditions& cond, double delay_budget_ns);

/// Exact optimum over all 2^n assignments (n <= 16). Among equal leakages
/// the lexicographically first assignment (conventional < stacked, first
/// instance most significant) wins.
OptimizeResult brute_force_optimize(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                                    const Conditions& cond, double delay_budget_ns);

/// `assign <instance_id> <variant>` lines in declaration order.
std::string assignment_text(const Netlist& nl, const std::vector<Variant>& assignment);

/// Copy of `nl` with variants replaced by `assignment`.
Netlist apply_assignment(const Netlist& nl, const std::vector<Variant>& assignment);

} // namespace lowpower
