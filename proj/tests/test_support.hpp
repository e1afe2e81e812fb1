#pragma once

// Random netlist generators and independent oracles shared by the unit and
// acceptance suites. Nothing here calls into the analysis engine's timing or
// activity code paths.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lowpower/cell_library.hpp"
#include "lowpower/netlist.hpp"

namespace lowpower::testing {

inline std::string samples_dir() { return LOWPOWER_SAMPLES_DIR; }

inline std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CellShape {
  const char* name;
  int inputs;
  int outputs;
};

inline const std::vector<CellShape>& cell_shapes()
{
  static const std::vector<CellShape> shapes = {
      {"NOT", 1, 1}, {"NAND", 2, 1}, {"FULLADDER", 3, 2}, {"MUX1", 3, 1}};
  return shapes;
}

/// Tree-shaped netlist: every net feeds at most one gate pin, so no signal
/// reconverges. A full adder's carry output becomes an extra primary output.
inline Netlist random_tree_netlist(std::mt19937_64& rng, int max_inputs)
{
  Netlist nl;
  int next_net = 0;
  int next_gate = 0;
  auto fresh_net = [&] { return "n" + std::to_string(next_net++); };
  std::uniform_int_distribution<int> pick_shape(0, static_cast<int>(cell_shapes().size()) - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Instance> gates;
  int inputs_used = 0;
  // Breadth-first expansion of unresolved nets into gates or primary inputs,
  // never exceeding max_inputs leaves in total.
  std::vector<std::pair<std::string, int>> pending{{fresh_net(), 0}};
  nl.primary_outputs.push_back(pending.front().first);
  for (std::size_t head = 0; head < pending.size(); ++head) {
    const auto [net, depth] = pending[head];
    const int unresolved = static_cast<int>(pending.size() - head - 1);
    const CellShape& shape = cell_shapes()[pick_shape(rng)];
    const bool room = inputs_used + unresolved + shape.inputs <= max_inputs;
    const bool leaf = !room || (depth > 0 && (depth > 4 || coin(rng) < 0.25 + 0.1 * depth));
    if (leaf) {
      nl.primary_inputs.push_back(net);
      ++inputs_used;
      continue;
    }
    Instance inst;
    inst.id = "g" + std::to_string(next_gate++);
    inst.cell_name = shape.name;
    inst.output_nets.push_back(net);
    if (shape.outputs == 2) {
      const std::string extra = fresh_net();
      inst.output_nets.push_back(extra);
      nl.primary_outputs.push_back(extra);
    }
    for (int k = 0; k < shape.inputs; ++k) {
      inst.input_nets.push_back(fresh_net());
      pending.emplace_back(inst.input_nets.back(), depth + 1);
    }
    gates.push_back(std::move(inst));
  }
  // Declaration order sources first so the file reads naturally.
  std::reverse(gates.begin(), gates.end());
  nl.instances = std::move(gates);
  return nl;
}

/// Random DAG: each gate pin reads a primary input or an earlier gate output.
/// Nets without fanout become primary outputs. Optional random wire loads.
inline Netlist random_dag_netlist(std::mt19937_64& rng, int gates, int inputs, bool wire_loads = true)
{
  Netlist nl;
  std::vector<std::string> available;
  for (int i = 0; i < inputs; ++i) {
    nl.primary_inputs.push_back("i" + std::to_string(i));
    available.push_back(nl.primary_inputs.back());
  }
  std::uniform_int_distribution<int> pick_shape(0, static_cast<int>(cell_shapes().size()) - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  int next_net = 0;
  for (int g = 0; g < gates; ++g) {
    const CellShape& shape = cell_shapes()[pick_shape(rng)];
    Instance inst;
    inst.id = "g" + std::to_string(g);
    inst.cell_name = shape.name;
    for (int k = 0; k < shape.inputs; ++k) {
      // Bias towards recent nets to get deeper logic.
      std::uniform_int_distribution<std::size_t> pick(0, available.size() - 1);
      std::size_t idx = pick(rng);
      if (coin(rng) < 0.5) idx = std::max(idx, pick(rng));
      inst.input_nets.push_back(available[idx]);
    }
    for (int k = 0; k < shape.outputs; ++k) {
      inst.output_nets.push_back("n" + std::to_string(next_net++));
    }
    for (const auto& o : inst.output_nets) available.push_back(o);
    nl.instances.push_back(std::move(inst));
  }
  std::vector<std::string> used;
  for (const auto& inst : nl.instances) used.insert(used.end(), inst.input_nets.begin(), inst.input_nets.end());
  for (const auto& inst : nl.instances)
    for (const auto& o : inst.output_nets)
      if (std::find(used.begin(), used.end(), o) == used.end() || coin(rng) < 0.15)
        nl.primary_outputs.push_back(o);
  if (wire_loads) {
    std::uniform_real_distribution<double> cap(0.0, 20.0);
    for (const auto& inst : nl.instances)
      for (const auto& o : inst.output_nets)
        if (coin(rng) < 0.3) nl.net_load_ff[o] = cap(rng);
  }
  return nl;
}

/// Random DAG with a guaranteed reconvergent structure appended:
/// x -> NOT -> r1, x -> NOT -> r2, NAND(r1, r2) -> primary output.
inline Netlist random_reconvergent_netlist(std::mt19937_64& rng, int gates, int inputs)
{
  Netlist nl = random_dag_netlist(rng, gates, inputs, false);
  std::vector<std::string> nets = nl.primary_inputs;
  for (const auto& inst : nl.instances) nets.insert(nets.end(), inst.output_nets.begin(), inst.output_nets.end());
  std::uniform_int_distribution<std::size_t> pick(0, nets.size() - 1);
  const std::string x = nets[pick(rng)];
  nl.instances.push_back({"rc_a", "NOT", Variant::conventional, {x}, {"rc1"}});
  nl.instances.push_back({"rc_b", "NOT", Variant::conventional, {x}, {"rc2"}});
  nl.instances.push_back({"rc_c", "NAND", Variant::conventional, {"rc1", "rc2"}, {"rc3"}});
  nl.primary_outputs.push_back("rc3");
  return nl;
}

/// Brute-force critical delay: enumerate every primary-input to
/// primary-output path by depth-first search and sum arc delays.
/// `arc_delay(instance, output_pin)` gives the loaded delay of one arc.
inline double path_enumeration_delay(const Netlist& nl,
                                     const std::function<double(std::size_t, std::size_t)>& arc_delay)
{
  // driver[net] = (instance, output pin)
  std::map<std::string, std::pair<std::size_t, std::size_t>> driver;
  for (std::size_t i = 0; i < nl.instances.size(); ++i)
    for (std::size_t k = 0; k < nl.instances[i].output_nets.size(); ++k)
      driver[nl.instances[i].output_nets[k]] = {i, k};

  // Walk backwards from each primary output collecting paths as arc lists,
  // then sum them forwards (input to output).
  double worst = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  std::function<void(const std::string&)> walk = [&](const std::string& net) {
    const auto it = driver.find(net);
    if (it == driver.end()) {
      double sum = 0.0;
      for (auto a = arcs.rbegin(); a != arcs.rend(); ++a) sum = sum + arc_delay(a->first, a->second);
      worst = std::max(worst, sum);
      return;
    }
    arcs.push_back(it->second);
    for (const auto& in : nl.instances[it->second.first].input_nets) walk(in);
    arcs.pop_back();
  };
  for (const auto& po : nl.primary_outputs) walk(po);
  return worst;
}

/// Random but valid library: arbitrary cell names and pin counts.
inline Library random_library(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Library lib;
  lib.technology.node_name = "rand" + std::to_string(rng() % 1000);
  lib.technology.vth0 = 0.2 + 0.4 * u(rng);
  lib.technology.n_slope = 1.0 + u(rng);
  lib.technology.i0 = 1e-7 + 1e-6 * u(rng);
  lib.technology.w_over_l = 0.5 + 4 * u(rng);
  lib.technology.eta_dibl = 0.15 * u(rng);
  lib.technology.alpha_sat = 1.0 + u(rng);
  lib.technology.tox_nm = 1 + 3 * u(rng);
  lib.technology.temperature_k = 250 + 150 * u(rng);
  lib.ref_point = {0.8 + u(rng), 1e6 + 1e9 * u(rng), 250 + 150 * u(rng)};
  lib.short_circuit_fraction = 0.3 * u(rng);
  lib.corners = default_corners();
  lib.corners[1].vth_shift_frac = -0.3 * u(rng);
  const int cells = static_cast<int>(rng() % 6);
  for (int c = 0; c < cells; ++c) {
    Cell cell;
    cell.name = "C" + std::to_string(c);
    cell.variant = rng() % 2 ? Variant::stacked : Variant::conventional;
    const int n_in = 1 + static_cast<int>(rng() % 4);
    const int n_out = 1 + static_cast<int>(rng() % 2);
    for (int k = 0; k < n_in; ++k) cell.inputs.push_back("i" + std::to_string(k));
    for (int k = 0; k < n_out; ++k) cell.outputs.push_back("o" + std::to_string(k));
    for (const auto& out : cell.outputs) {
      std::string expr = cell.inputs[0];
      for (std::size_t k = 1; k < cell.inputs.size(); ++k)
        expr += (rng() % 2 ? " & " : " ^ ") + std::string(rng() % 2 ? "!" : "") + cell.inputs[k];
      cell.functions[out] = expr;
      cell.intrinsic_delay_ns[out] = 0.01 + 50 * u(rng);
    }
    cell.area_um2 = 0.1 + 30 * u(rng);
    for (const auto& in : cell.inputs) cell.input_cap_ff[in] = 20 * u(rng);
    cell.load_coeff_ns_per_ff = u(rng);
    cell.leakage_nw = 30 * u(rng);
    if (rng() % 2) cell.ref_dynamic_pw = 200 * u(rng);
    if (rng() % 2) {
      LoadMeasurement lm;
      lm.area_um2 = 0.1 + 30 * u(rng);
      for (const auto& out : cell.outputs) lm.delay_ns[out] = 50 * u(rng);
      lm.leakage_nw = 30 * u(rng);
      lm.dynamic_pw = 200 * u(rng);
      cell.load_measurement = lm;
    }
    lib.cells.emplace(CellKey{cell.name, cell.variant}, cell);
  }
  return lib;
}

} // namespace lowpower::testing
