#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowpower/activity.hpp"
#include "lowpower/cell_library.hpp"
#include "lowpower/corners.hpp"
#include "lowpower/device_models.hpp"
#include "lowpower/netlist.hpp"

namespace lowpower {

/// Everything that moves an analysis away from the library's reference point.
struct Conditions {
  OperatingPoint op;
  CornerSpec corner = typical_corner();
  std::optional<double> vth0;        // nominal threshold override (sweeps)
  LeakageSource leakage_source = LeakageSource::table;
  std::optional<double> k_sc;        // short-circuit fraction override

  DerateOptions derate_options() const { return {vth0, leakage_source}; }
};

/// Reference operating point, TT corner.
Conditions reference_conditions(const Library& lib);

struct TimingReport {
  std::map<std::string, double> arrival_ns;
  std::vector<std::string> critical_path;  // instance ids, input to output
  std::string critical_output;             // primary output net, empty if none
  double critical_delay_ns = 0.0;
};

struct PowerBreakdown {
  double switching_w = 0.0;
  double short_circuit_w = 0.0;
  double leakage_w = 0.0;
  double total_w = 0.0;
};

struct InstancePower {
  std::string id;
  PowerBreakdown power;
};

struct PowerReport {
  PowerBreakdown total;
  std::vector<InstancePower> per_instance;  // declaration order
};

/// Per-instance component values (declaration order) and their sum.
struct ComponentPower {
  double total_w = 0.0;
  std::vector<double> per_instance_w;
};

/// Precomputed per-instance characterization for fast re-timing under
/// different variant assignments. Both variants are prepared when
/// `all_variants` is set; otherwise only those present in the netlist.
class TimingGraph {
public:
  TimingGraph(const Netlist& nl, const Library& lib, const Conditions& cond, bool all_variants = false);

  std::size_t instance_count() const { return instances_.size(); }
  std::vector<Variant> netlist_variants() const;

  TimingReport run(std::span<const Variant> variants) const;
  double critical_delay(std::span<const Variant> variants) const;

  /// Leakage of instance `i` realized as `v`, watts.
  double leakage_w(std::size_t i, Variant v) const;

private:
  struct Characterization {
    EffectiveCell eff;
    std::vector<double> input_cap_ff;
  };
  struct Node {
    std::string id;
    std::vector<int> inputs;   // net indices
    std::vector<int> outputs;
    std::optional<Characterization> variant[2];
  };
  struct FanoutPin {
    int instance;
    int pin;
  };

  const Characterization& at(std::size_t i, Variant v) const;
  double net_load_ff(int net, std::span<const Variant> variants) const;
  // Arrival per net plus the (instance, input net) that set it.
  void propagate(std::span<const Variant> variants, std::vector<double>& arrival,
                 std::vector<int>* via_instance, std::vector<int>* via_net) const;

  std::vector<std::string> net_names_;
  std::vector<double> wire_load_ff_;
  std::vector<std::vector<FanoutPin>> fanout_;
  std::vector<int> primary_inputs_;
  std::vector<int> primary_outputs_;
  std::vector<Node> instances_;
  std::vector<int> order_;
  double vdd_ = 0.0;
};

TimingReport static_timing(const Netlist& nl, const Library& lib, const Conditions& cond);
TimingReport static_timing(const Netlist& nl, const Library& lib, const OperatingPoint& op,
                           const CornerSpec& corner);

/// Load capacitance seen by every net: fanout input caps plus wire load, fF.
std::map<std::string, double> net_capacitance_ff(const Netlist& nl, const Library& lib);

/// Sum over instances of toggle(out) * C_eff * vdd^2 * f (no 1/2 factor).
ComponentPower dynamic_power(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                             const OperatingPoint& op);

/// Sum over instances of vdd * Ioff, Ioff rescaled by the device model.
ComponentPower leakage_power(const Netlist& nl, const Library& lib, const Conditions& cond);

inline constexpr double kDefaultShortCircuitFraction = 0.10;

double short_circuit_power(double p_switching_w, double k_sc = kDefaultShortCircuitFraction);

PowerReport total_power(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                        const Conditions& cond);

struct SweepPoint {
  double vdd = 0.0;
  double vth = 0.0;
  bool feasible = false;
  PowerReport power;    // zero when infeasible
  TimingReport timing;  // zero when infeasible
};

/// Full vdd x vth cross product, vdd-major. Points where vdd does not exceed
/// the corner-shifted threshold are marked infeasible.
std::vector<SweepPoint> sweep(const Netlist& nl, const Library& lib, const ActivityMap& activity,
                              std::span<const double> vdd_grid, std::span<const double> vth_grid,
                              const Conditions& base);

struct CornerResult {
  CornerSpec corner;
  PowerReport power;
  TimingReport timing;
};

/// Every corner of the library's corner table, in table order.
std::vector<CornerResult> corner_analysis(const Netlist& nl, const Library& lib,
                                          const ActivityMap& activity, const Conditions& base);

} // namespace lowpower
