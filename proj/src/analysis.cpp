#include "lowpower/analysis.hpp"

#include <algorithm>
#include <unordered_map>

#include "lowpower/errors.hpp"

namespace lowpower {

namespace {

constexpr double kFemto = 1e-15;
constexpr double kNano = 1e-9;

int variant_slot(Variant v) { return v == Variant::stacked ? 1 : 0; }

} // namespace

Conditions reference_conditions(const Library& lib)
{
  Conditions cond;
  cond.op = lib.ref_point;
  return cond;
}

// ---------------------------------------------------------------------------
// TimingGraph

TimingGraph::TimingGraph(const Netlist& nl, const Library& lib, const Conditions& cond, bool all_variants)
    : vdd_(cond.op.vdd)
{
  std::unordered_map<std::string, int> net_index;
  for (const auto& n : nl.nets()) {
    net_index.emplace(n, static_cast<int>(net_names_.size()));
    net_names_.push_back(n);
  }
  fanout_.resize(net_names_.size());
  wire_load_ff_.assign(net_names_.size(), 0.0);
  for (const auto& [net, cap] : nl.net_load_ff)
    if (auto it = net_index.find(net); it != net_index.end()) wire_load_ff_[it->second] = cap;
  for (const auto& n : nl.primary_inputs) primary_inputs_.push_back(net_index.at(n));
  for (const auto& n : nl.primary_outputs) primary_outputs_.push_back(net_index.at(n));

  const DerateOptions options = cond.derate_options();
  instances_.reserve(nl.instances.size());
  for (std::size_t i = 0; i < nl.instances.size(); ++i) {
    const Instance& inst = nl.instances[i];
    Node node;
    node.id = inst.id;
    for (std::size_t k = 0; k < inst.input_nets.size(); ++k) {
      const int net = net_index.at(inst.input_nets[k]);
      node.inputs.push_back(net);
      fanout_[net].push_back({static_cast<int>(i), static_cast<int>(k)});
    }
    for (const auto& n : inst.output_nets) node.outputs.push_back(net_index.at(n));

    for (Variant v : {Variant::conventional, Variant::stacked}) {
      if (!all_variants && v != inst.variant) continue;
      const Cell& cell = lib.at(inst.cell_name, v);
      if (cell.inputs.size() != inst.input_nets.size() || cell.outputs.size() != inst.output_nets.size())
        throw DomainError("instance " + inst.id + ": pin arity does not match cell " + cell.name);
      Characterization ch;
      try {
        ch.eff = derate_cell(cell, lib, cond.op, cond.corner, options);
      } catch (const DomainError& e) {
        throw DomainError("instance " + inst.id + ": " + e.what());
      }
      for (const auto& pin : cell.inputs) ch.input_cap_ff.push_back(cell.input_cap_ff.at(pin));
      node.variant[variant_slot(v)] = std::move(ch);
    }
    instances_.push_back(std::move(node));
  }
  order_ = topological_order(nl);
}

std::vector<Variant> TimingGraph::netlist_variants() const
{
  std::vector<Variant> out;
  for (const auto& node : instances_)
    out.push_back(node.variant[0] ? Variant::conventional : Variant::stacked);
  return out;
}

const TimingGraph::Characterization& TimingGraph::at(std::size_t i, Variant v) const
{
  const auto& slot = instances_[i].variant[variant_slot(v)];
  if (!slot)
    throw DomainError("instance " + instances_[i].id + ": variant " + std::string(to_string(v)) +
                      " not prepared");
  return *slot;
}

double TimingGraph::leakage_w(std::size_t i, Variant v) const
{
  return at(i, v).eff.leakage_nw * kNano;
}

double TimingGraph::net_load_ff(int net, std::span<const Variant> variants) const
{
  double load = wire_load_ff_[net];
  for (const FanoutPin& f : fanout_[net]) load += at(f.instance, variants[f.instance]).input_cap_ff[f.pin];
  return load;
}

void TimingGraph::propagate(std::span<const Variant> variants, std::vector<double>& arrival,
                            std::vector<int>* via_instance, std::vector<int>* via_net) const
{
  if (variants.size() != instances_.size())
    throw DomainError("timing: assignment size does not match instance count");
  arrival.assign(net_names_.size(), 0.0);
  if (via_instance) via_instance->assign(net_names_.size(), -1);
  if (via_net) via_net->assign(net_names_.size(), -1);

  for (int i : order_) {
    const Node& node = instances_[i];
    const Characterization& ch = at(i, variants[i]);
    double latest = 0.0;
    int latest_net = node.inputs.empty() ? -1 : node.inputs.front();
    for (int net : node.inputs)
      if (arrival[net] > latest) {
        latest = arrival[net];
        latest_net = net;
      }
    for (std::size_t k = 0; k < node.outputs.size(); ++k) {
      const int out = node.outputs[k];
      const double arc = ch.eff.delay_ns[k] + ch.eff.load_coeff_ns_per_ff * net_load_ff(out, variants);
      arrival[out] = latest + arc;
      if (via_instance) (*via_instance)[out] = i;
      if (via_net) (*via_net)[out] = latest_net;
    }
  }
}

double TimingGraph::critical_delay(std::span<const Variant> variants) const
{
  std::vector<double> arrival;
  propagate(variants, arrival, nullptr, nullptr);
  double worst = 0.0;
  for (int po : primary_outputs_) worst = std::max(worst, arrival[po]);
  return worst;
}

TimingReport TimingGraph::run(std::span<const Variant> variants) const
{
  std::vector<double> arrival;
  std::vector<int> via_instance;
  std::vector<int> via_net;
  propagate(variants, arrival, &via_instance, &via_net);

  TimingReport report;
  for (std::size_t n = 0; n < net_names_.size(); ++n) report.arrival_ns[net_names_[n]] = arrival[n];

  int worst = -1;
  for (int po : primary_outputs_)
    if (worst < 0 || arrival[po] > arrival[worst]) worst = po;
  if (worst < 0) return report;

  report.critical_output = net_names_[worst];
  report.critical_delay_ns = arrival[worst];
  for (int net = worst; net >= 0 && via_instance[net] >= 0; net = via_net[net])
    report.critical_path.push_back(instances_[via_instance[net]].id);
  std::reverse(report.critical_path.begin(), report.critical_path.end());
  return report;
}

// ---------------------------------------------------------------------------
// Timing and power

TimingReport static_timing(const Netlist& nl, const Library& lib, const Conditions& cond)
{
  TimingGraph graph(nl, lib, cond);
  return graph.run(graph.netlist_variants());
}

TimingReport static_timing(const Netlist& nl, const Library& lib, const OperatingPoint& op,
                           const CornerSpec& corner)
{
  Conditions cond;
  cond.op = op;
  cond.corner = corner;
  return static_timing(nl, lib, cond);
}

std::map<std::string, double> net_capacitance_ff(const Netlist& nl, const Library& lib)
{
  std::map<std::string, double> cap;
  for (const auto& n : nl.nets()) cap[n] = 0.0;
  for (const auto& [net, c] : nl.net_load_ff) cap[net] += c;
  for (const auto& inst : nl.instances) {
    const Cell& cell = lib.at(inst.cell_name, inst.variant);
    for (std::size_t k = 0; k < inst.input_nets.size() && k < cell.inputs.size(); ++k)
      cap[inst.input_nets[k]] += cell.input_cap_ff.at(cell.inputs[k]);
  }
  return cap;
}

ComponentPower dynamic_power(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                             const OperatingPoint& op)
{
  const auto cap = net_capacitance_ff(nl, lib);
  const double v2f = op.vdd * op.vdd * op.frequency;
  ComponentPower out;
  out.per_instance_w.reserve(nl.instances.size());
  for (const auto& inst : nl.instances) {
    double p = 0.0;
    for (const auto& net : inst.output_nets) {
      const auto it = activity.find(net);
      if (it == activity.end()) throw DomainError("dynamic_power: no activity for net " + net);
      p += it->second.toggle_rate * cap.at(net) * kFemto * v2f;
    }
    out.per_instance_w.push_back(p);
    out.total_w += p;
  }
  return out;
}

ComponentPower leakage_power(const Netlist& nl, const Library& lib, const Conditions& cond)
{
  const TimingGraph graph(nl, lib, cond);
  const auto variants = graph.netlist_variants();
  ComponentPower out;
  out.per_instance_w.reserve(nl.instances.size());
  for (std::size_t i = 0; i < nl.instances.size(); ++i) {
    const double p = graph.leakage_w(i, variants[i]);
    out.per_instance_w.push_back(p);
    out.total_w += p;
  }
  return out;
}

double short_circuit_power(double p_switching_w, double k_sc)
{
  if (!(p_switching_w >= 0.0)) throw DomainError("short_circuit_power: switching power must be non-negative");
  if (!(k_sc >= 0.0)) throw DomainError("short_circuit_power: k_sc must be non-negative");
  return k_sc * p_switching_w;
}

PowerReport total_power(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                        const Conditions& cond)
{
  const double k_sc = cond.k_sc.value_or(lib.short_circuit_fraction);
  const auto sw = dynamic_power(nl, lib, activity, cond.op);
  const auto leak = leakage_power(nl, lib, cond);

  PowerReport report;
  report.per_instance.reserve(nl.instances.size());
  for (std::size_t i = 0; i < nl.instances.size(); ++i) {
    PowerBreakdown b;
    b.switching_w = sw.per_instance_w[i];
    b.short_circuit_w = short_circuit_power(b.switching_w, k_sc);
    b.leakage_w = leak.per_instance_w[i];
    b.total_w = b.switching_w + b.short_circuit_w + b.leakage_w;
    report.per_instance.push_back({nl.instances[i].id, b});
  }
  PowerBreakdown& t = report.total;
  t.switching_w = sw.total_w;
  t.short_circuit_w = short_circuit_power(sw.total_w, k_sc);
  t.leakage_w = leak.total_w;
  t.total_w = t.switching_w + t.short_circuit_w + t.leakage_w;
  return report;
}

std::vector<SweepPoint> sweep(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                              std::span<const double> vdd_grid, std::span<const double> vth_grid,
                              const Conditions& base)
{
  if (vdd_grid.empty() || vth_grid.empty()) throw DomainError("sweep: empty voltage grid");
  std::vector<SweepPoint> points;
  points.reserve(vdd_grid.size() * vth_grid.size());
  for (double vdd : vdd_grid) {
    for (double vth : vth_grid) {
      SweepPoint pt;
      pt.vdd = vdd;
      pt.vth = vth;
      Conditions cond = base;
      cond.op.vdd = vdd;
      cond.vth0 = vth;
      const double shifted = corner_threshold(lib, cond.corner, cond.derate_options());
      pt.feasible = vth > 0.0 && vdd > vth && vdd > shifted;
      if (pt.feasible) {
        pt.power = total_power(nl, lib, activity, cond);
        pt.timing = static_timing(nl, lib, cond);
      }
      points.push_back(std::move(pt));
    }
  }
  return points;
}

std::vector<CornerResult> corner_analysis(const Netlist& nl, const Library& lib,
                                          const ActivityMap& activity, const Conditions& base)
{
  std::vector<CornerResult> out;
  out.reserve(lib.corners.size());
  for (const auto& corner : lib.corners) {
    Conditions cond = base;
    cond.corner = corner;
    out.push_back({corner, total_power(nl, lib, activity, cond), static_timing(nl, lib, cond)});
  }
  return out;
}

} // namespace lowpower
