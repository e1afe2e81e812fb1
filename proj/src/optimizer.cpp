#include "lowpower/optimizer.hpp"

#include <algorithm>
#include <sstream>

#include "lowpower/errors.hpp"

namespace lowpower {

namespace {

void require_both_variants(const Netlist& nl, const Library& lib)
{
  for (const auto& inst : nl.instances)
    for (Variant v : {Variant::conventional, Variant::stacked})
      if (!lib.find(inst.cell_name, v))
        throw DomainError("optimizer: library lacks " + inst.cell_name + "/" + std::string(to_string(v)));
}

void require_budget(double budget)
{
  if (!(budget > 0.0)) throw DomainError("optimizer: delay budget must be positive");
}

double total_leakage(const TimingGraph& graph, const std::vector<Variant>& assignment)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) sum += graph.leakage_w(i, assignment[i]);
  return sum;
}

struct SearchState {
  std::vector<Variant> assignment;
  double delay_ns = 0.0;
  double leakage_w = 0.0;
  int moves = 0;
};

// Flips to stacked, one at a time, the admissible instance with the best
// leakage saved per critical-delay increase. `locked` instances stay put.
void descend(const TimingGraph& graph, SearchState& state, double budget, const std::vector<bool>& locked)
{
  const std::size_t n = state.assignment.size();
  for (;;) {
    int best = -1;
    double best_ratio = 0.0;
    double best_delay = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (locked[i] || state.assignment[i] == Variant::stacked) continue;
      const double saved = graph.leakage_w(i, Variant::conventional) - graph.leakage_w(i, Variant::stacked);
      if (!(saved > 0.0)) continue;
      state.assignment[i] = Variant::stacked;
      const double delay = graph.critical_delay(state.assignment);
      state.assignment[i] = Variant::conventional;
      if (delay > budget) continue;
      const double ratio = saved / std::max(delay - state.delay_ns, kDelayIncreaseFloorNs);
      if (best < 0 || ratio > best_ratio) {
        best = static_cast<int>(i);
        best_ratio = ratio;
        best_delay = delay;
      }
    }
    if (best < 0) break;
    state.assignment[best] = Variant::stacked;
    state.delay_ns = best_delay;
    ++state.moves;
  }
  state.leakage_w = total_leakage(graph, state.assignment);
}

// Reverts stacked instances to conventional, cheapest leakage cost per
// delay recovered first, until the critical delay fits. False if it cannot.
bool ascend(const TimingGraph& graph, SearchState& state, double budget, const std::vector<bool>& locked)
{
  const std::size_t n = state.assignment.size();
  while (state.delay_ns > budget) {
    int best = -1;
    double best_ratio = 0.0;
    double best_cost = 0.0;
    double best_delay = 0.0;
    // Cheapest single revert that closes the gap, if there is one.
    int closing = -1;
    double closing_cost = 0.0;
    double closing_delay = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (locked[i] || state.assignment[i] != Variant::stacked) continue;
      state.assignment[i] = Variant::conventional;
      const double delay = graph.critical_delay(state.assignment);
      state.assignment[i] = Variant::stacked;
      const double cost = graph.leakage_w(i, Variant::conventional) - graph.leakage_w(i, Variant::stacked);
      if (delay <= budget && (closing < 0 || cost < closing_cost)) {
        closing = static_cast<int>(i);
        closing_cost = cost;
        closing_delay = delay;
      }
      // Parallel critical paths can need several reverts before any one
      // of them shows a gain.
      const double recovered =
          std::max(std::min(state.delay_ns - delay, state.delay_ns - budget), kDelayIncreaseFloorNs);
      const double ratio = cost / recovered;
      if (best < 0 || ratio < best_ratio) {
        best = static_cast<int>(i);
        best_ratio = ratio;
        best_cost = cost;
        best_delay = delay;
      }
    }
    if (closing >= 0 && (best < 0 || closing_cost <= best_cost)) {
      best = closing;
      best_delay = closing_delay;
    }
    if (best < 0) return false;
    state.assignment[best] = Variant::conventional;
    state.delay_ns = best_delay;
    ++state.moves;
  }
  state.leakage_w = total_leakage(graph, state.assignment);
  return true;
}

// Local moves around a descent result, accepting strict leakage improvements
// only: give back one stacked instance and descend again with it held
// conventional, or force one conventional instance to stacked and back off
// others until the budget holds.
void refine(const TimingGraph& graph, SearchState& state, double budget)
{
  const std::size_t n = state.assignment.size();
  auto accept = [&](SearchState& trial) {
    if (trial.delay_ns > budget || !(trial.leakage_w < state.leakage_w * (1.0 - 1e-12))) return false;
    state = std::move(trial);
    return true;
  };
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i = 0; i < n && !improved; ++i) {
      std::vector<bool> locked(n, false);
      locked[i] = true;
      SearchState trial = state;
      if (state.assignment[i] == Variant::stacked) {
        trial.assignment[i] = Variant::conventional;
        trial.delay_ns = graph.critical_delay(trial.assignment);
        ++trial.moves;
      } else {
        if (!(graph.leakage_w(i, Variant::conventional) > graph.leakage_w(i, Variant::stacked))) continue;
        trial.assignment[i] = Variant::stacked;
        trial.delay_ns = graph.critical_delay(trial.assignment);
        ++trial.moves;
        if (!ascend(graph, trial, budget, locked)) continue;
      }
      descend(graph, trial, budget, locked);
      improved = accept(trial);
    }
  }
}

} // namespace

OptimizeResult optimize_leakage(const Netlist& nl, const Library& lib, const ActivityMap& /*activity*/,
                                const Conditions& cond, double delay_budget_ns)
{
  require_budget(delay_budget_ns);
  require_both_variants(nl, lib);
  const TimingGraph graph(nl, lib, cond, true);
  const std::size_t n = graph.instance_count();

  SearchState state;
  state.assignment.assign(n, Variant::conventional);
  state.delay_ns = graph.critical_delay(state.assignment);
  state.leakage_w = total_leakage(graph, state.assignment);

  OptimizeResult result;
  if (state.delay_ns > delay_budget_ns) {
    result.assignment = state.assignment;
    result.critical_delay_ns = state.delay_ns;
    result.leakage_w = state.leakage_w;
    return result;
  }
  const std::vector<bool> none(n, false);
  descend(graph, state, delay_budget_ns, none);
  refine(graph, state, delay_budget_ns);

  // Second start from all-stacked, backing off until the budget holds.
  SearchState reverse;
  reverse.assignment.assign(n, Variant::stacked);
  reverse.delay_ns = graph.critical_delay(reverse.assignment);
  if (ascend(graph, reverse, delay_budget_ns, none)) {
    descend(graph, reverse, delay_budget_ns, none);
    refine(graph, reverse, delay_budget_ns);
    if (reverse.leakage_w < state.leakage_w * (1.0 - 1e-12)) state = std::move(reverse);
  }

  result.assignment = std::move(state.assignment);
  result.critical_delay_ns = state.delay_ns;
  result.leakage_w = state.leakage_w;
  result.moves_accepted = state.moves;
  result.feasible = true;
  return result;
}

OptimizeResult brute_force_optimize(const Netlist& nl, const Library& lib, const ActivityMap& /*activity*/,
                                    const Conditions& cond, double delay_budget_ns)
{
  require_budget(delay_budget_ns);
  const std::size_t n = nl.instances.size();
  if (n > static_cast<std::size_t>(kMaxBruteForceInstances))
    throw CapacityError("brute_force_optimize: " + std::to_string(n) + " instances exceed the limit of " +
                        std::to_string(kMaxBruteForceInstances));
  require_both_variants(nl, lib);
  const TimingGraph graph(nl, lib, cond, true);

  OptimizeResult best;
  best.assignment.assign(n, Variant::conventional);
  best.critical_delay_ns = graph.critical_delay(best.assignment);
  best.leakage_w = total_leakage(graph, best.assignment);

  std::vector<Variant> assignment(n);
  bool found = false;
  // Counting upward with instance 0 as the most significant bit visits
  // assignments in lexicographic order.
  for (std::uint32_t code = 0; code < (std::uint32_t{1} << n); ++code) {
    for (std::size_t i = 0; i < n; ++i)
      assignment[i] = (code >> (n - 1 - i)) & 1u ? Variant::stacked : Variant::conventional;
    const double delay = graph.critical_delay(assignment);
    if (delay > delay_budget_ns) continue;
    const double leak = total_leakage(graph, assignment);
    if (!found || leak < best.leakage_w) {
      found = true;
      best.assignment = assignment;
      best.leakage_w = leak;
      best.critical_delay_ns = delay;
    }
  }
  best.feasible = found;
  best.moves_accepted = static_cast<int>(std::count(best.assignment.begin(), best.assignment.end(), Variant::stacked));
  return best;
}

std::string assignment_text(const Netlist& nl, const std::vector<Variant>& assignment)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < nl.instances.size() && i < assignment.size(); ++i)
    os << "assign " << nl.instances[i].id << ' ' << to_string(assignment[i]) << '\n';
  return os.str();
}

Netlist apply_assignment(const Netlist& nl, const std::vector<Variant>& assignment)
{
  if (assignment.size() != nl.instances.size())
    throw DomainError("apply_assignment: assignment does not cover every instance");
  Netlist out = nl;
  for (std::size_t i = 0; i < assignment.size(); ++i) out.instances[i].variant = assignment[i];
  return out;
}

} // namespace lowpower
