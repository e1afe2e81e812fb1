#pragma once

#include <string>

namespace lowpower {

/// Calibrated device parameters behind the leakage and delay physics.
struct TechnologyModel {
  std::string node_name = "130nm-ref";
  double vth0 = 0.4;           // V
  double n_slope = 1.5;        // subthreshold slope factor
  double i0 = 1.0e-6;          // A, calibration pre-factor
  double w_over_l = 2.0;
  double eta_dibl = 0.08;      // V/V
  double alpha_sat = 1.3;      // alpha-power-law exponent
  double tox_nm = 2.2;         // informational only
  double temperature_k = 300.0;

  bool operator==(const TechnologyModel&) const = default;
};

struct OperatingPoint {
  double vdd = 1.2;            // V
  double frequency = 100.0e6;  // Hz
  double temperature_k = 300.0;

  bool operator==(const OperatingPoint&) const = default;
};

/// Returns the first violated invariant, or an empty string when valid.
std::string check_invariants(const TechnologyModel& model);
std::string check_invariants(const OperatingPoint& op);

/// kT/q in volts.
double thermal_voltage(double temperature_k);

/// Subthreshold drain current with DIBL:
///   i0 * W/L * exp((vgs - vth0 + eta*vds) / (n vT)) * (1 - exp(-vds / vT)).
/// Underflow to zero is accepted.
double subthreshold_current(const TechnologyModel& model, double vgs, double vds);

/// Internal node voltage of a two-high off NMOS stack (both gates at 0 V),
/// found by bisection on current continuity through both devices.
double stack_intermediate_voltage(const TechnologyModel& model, double vdd);

struct StackLeakage {
  double current_a = 0.0;
  double stack_factor = 1.0;  // I(depth 1) / I(depth)
};

/// Off-state current of a stack of `depth` (1 or 2) series devices.
StackLeakage stack_leakage(const TechnologyModel& model, double vdd, int depth);

/// Alpha-power-law delay ratio  g(op) / g(ref)  with  g = vdd / (vdd - vth)^alpha.
double delay_scale_factor(const TechnologyModel& model, const OperatingPoint& op,
                          const OperatingPoint& ref_op);

/// Same law with separate thresholds for the evaluated and reference points;
/// used when a process corner or a sweep moves the threshold away from nominal.
double delay_scale_factor(double alpha_sat, double vdd, double vth, double ref_vdd,
                          double ref_vth);

/// i0 such that vdd * subthreshold_current(vgs = 0, vds = vdd) == target_leakage_w.
double calibrate_i0(const TechnologyModel& model, double target_leakage_w, double vdd);

} // namespace lowpower
