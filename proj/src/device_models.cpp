#include "lowpower/device_models.hpp"

#include <cmath>
#include <sstream>

#include "lowpower/errors.hpp"

namespace lowpower {

namespace {

constexpr double kBoltzmann = 1.380649e-23;      // J/K
constexpr double kElectronCharge = 1.602177e-19; // C

constexpr double kStackTolerance = 1.0e-6;
constexpr int kStackMaxIterations = 200;

// Threshold-dependent part of the alpha-power law.
double drive_term(double vdd, double vth, double alpha_sat)
{
  return vdd / std::pow(vdd - vth, alpha_sat);
}

} // namespace

std::string check_invariants(const TechnologyModel& m)
{
  if (!(m.vth0 > 0.0)) return "vth0 > 0";
  if (!(m.n_slope >= 1.0)) return "n_slope >= 1";
  if (!(m.i0 > 0.0)) return "i0 > 0";
  if (!(m.w_over_l > 0.0)) return "w_over_l > 0";
  if (!(m.eta_dibl >= 0.0 && m.eta_dibl < 1.0)) return "0 <= eta_dibl < 1";
  if (!(m.alpha_sat >= 1.0 && m.alpha_sat <= 2.0)) return "1 <= alpha_sat <= 2";
  if (!(m.temperature_k > 0.0)) return "temperature_k > 0";
  return {};
}

std::string check_invariants(const OperatingPoint& op)
{
  if (!(op.vdd > 0.0)) return "vdd > 0";
  if (!(op.frequency > 0.0)) return "frequency > 0";
  if (!(op.temperature_k > 0.0)) return "temperature_k > 0";
  return {};
}

double thermal_voltage(double temperature_k)
{
  if (!(temperature_k > 0.0))
    throw DomainError("thermal_voltage: temperature must be positive");
  return kBoltzmann * temperature_k / kElectronCharge;
}

double subthreshold_current(const TechnologyModel& model, double vgs, double vds)
{
  if (!(vds >= 0.0))
    throw DomainError("subthreshold_current: vds must be non-negative");
  const double vt = thermal_voltage(model.temperature_k);
  const double vth_eff = model.vth0 - model.eta_dibl * vds;
  return model.i0 * model.w_over_l * std::exp((vgs - vth_eff) / (model.n_slope * vt)) *
         (1.0 - std::exp(-vds / vt));
}

double stack_intermediate_voltage(const TechnologyModel& model, double vdd)
{
  if (!(vdd > 0.0))
    throw DomainError("stack_intermediate_voltage: vdd must be positive");

  auto top = [&](double vx) { return subthreshold_current(model, -vx, vdd - vx); };
  auto bottom = [&](double vx) { return subthreshold_current(model, 0.0, vx); };

  double lo = 0.0;
  double hi = vdd;
  // Current excess through the top device is positive at vx = 0 and negative at vx = vdd.
  if (!(top(lo) - bottom(lo) > 0.0) || !(top(hi) - bottom(hi) < 0.0)) {
    std::ostringstream os;
    os << "stack_intermediate_voltage: cannot bracket node voltage for vdd=" << vdd;
    throw NumericError(os.str());
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < kStackMaxIterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double i_top = top(mid);
    const double i_bottom = bottom(mid);
    if (i_bottom > 0.0 && std::abs(i_top - i_bottom) / i_bottom <= kStackTolerance)
      break;
    if (i_top > i_bottom)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

StackLeakage stack_leakage(const TechnologyModel& model, double vdd, int depth)
{
  if (!(vdd > 0.0))
    throw DomainError("stack_leakage: vdd must be positive");
  const double single = subthreshold_current(model, 0.0, vdd);
  switch (depth) {
  case 1:
    return {single, 1.0};
  case 2: {
    const double vx = stack_intermediate_voltage(model, vdd);
    const double stacked = subthreshold_current(model, 0.0, vx);
    return {stacked, single / stacked};
  }
  default:
    throw DomainError("stack_leakage: unsupported stack depth " + std::to_string(depth));
  }
}

double delay_scale_factor(double alpha_sat, double vdd, double vth, double ref_vdd, double ref_vth)
{
  if (!(vdd > vth) || !(ref_vdd > ref_vth))
    throw DomainError("circuit does not meet subthreshold operation assumptions: vdd must exceed vth");
  if (vdd == ref_vdd && vth == ref_vth) return 1.0;
  return drive_term(vdd, vth, alpha_sat) / drive_term(ref_vdd, ref_vth, alpha_sat);
}

double delay_scale_factor(const TechnologyModel& model, const OperatingPoint& op,
                          const OperatingPoint& ref_op)
{
  return delay_scale_factor(model.alpha_sat, op.vdd, model.vth0, ref_op.vdd, model.vth0);
}

double calibrate_i0(const TechnologyModel& model, double target_leakage_w, double vdd)
{
  if (!(target_leakage_w > 0.0))
    throw DomainError("calibrate_i0: target leakage must be positive");
  if (!(vdd > 0.0))
    throw DomainError("calibrate_i0: vdd must be positive");
  TechnologyModel unit = model;
  unit.i0 = 1.0;
  return target_leakage_w / (vdd * subthreshold_current(unit, 0.0, vdd));
}

} // namespace lowpower
