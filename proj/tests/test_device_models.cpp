#include <doctest.h>

#include <cmath>
#include <random>

#include "lowpower/device_models.hpp"
#include "lowpower/errors.hpp"

using namespace lowpower;

namespace {

// Frozen from tests/oracles/device_oracle.py (40-digit mpmath evaluation).
constexpr double kThermalVoltage300 = 0.0258519938808259;
constexpr double kThresholdRatio = 13.1810790223553;      // I(0.3 V) / I(0.4 V)
constexpr double kUnitCurrentAt12 = 3.312807076763339e-05; // eta = 0, i0 * W/L = 1
constexpr double kStackNodeVoltage = 0.0840775618341440;
constexpr double kStackFactor = 10.3981879015334;
constexpr double kDelayFactor09 = 1.38171108195159;

TechnologyModel default_model()
{
  return TechnologyModel{"130nm-ref", 0.4, 1.5, 1.0, 1.0, 0.08, 1.3, 2.2, 300.0};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_SUITE("device_models")
{
  TEST_CASE("thermal voltage")
  {
    CHECK(std::abs(thermal_voltage(300.0) - 0.025852) < 1e-6);
    CHECK(rel(thermal_voltage(300.0), kThermalVoltage300) < 1e-12);
    CHECK(thermal_voltage(600.0) == 2.0 * thermal_voltage(300.0));
    CHECK_THROWS_AS(thermal_voltage(0.0), DomainError);
    CHECK_THROWS_AS(thermal_voltage(-4.0), DomainError);
  }

  TEST_CASE("subthreshold current closed form")
  {
    TechnologyModel m = default_model();
    m.eta_dibl = 0.0;

    SUBCASE("zero drain bias carries no current")
    {
      CHECK(subthreshold_current(m, 0.0, 0.0) == 0.0);
      CHECK(subthreshold_current(m, 0.35, 0.0) == 0.0);
    }
    SUBCASE("threshold ratio")
    {
      TechnologyModel low = m;
      low.vth0 = 0.3;
      const double ratio = subthreshold_current(low, 0.0, 1.2) / subthreshold_current(m, 0.0, 1.2);
      CHECK(rel(ratio, kThresholdRatio) < 1e-9);
    }
    SUBCASE("direct evaluation")
    {
      CHECK(rel(subthreshold_current(m, 0.0, 1.2), kUnitCurrentAt12) < 1e-12);
      m.i0 = 3e-7;
      m.w_over_l = 2.5;
      CHECK(rel(subthreshold_current(m, 0.0, 1.2), 7.5e-7 * kUnitCurrentAt12) < 1e-12);
    }
    SUBCASE("negative drain bias rejected")
    {
      CHECK_THROWS_AS(subthreshold_current(m, 0.0, -0.1), DomainError);
    }
    SUBCASE("deep underflow is silent")
    {
      m.vth0 = 40.0;
      CHECK(subthreshold_current(m, 0.0, 1.2) == 0.0);
    }
  }

  TEST_CASE("subthreshold current is monotone on a 10x10x10 grid")
  {
    const TechnologyModel base = default_model();
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b)
        for (int c = 0; c < 10; ++c) {
          const double vgs = -0.2 + 0.05 * a;
          const double vds = 0.05 + 0.12 * b;
          TechnologyModel m = base;
          m.vth0 = 0.2 + 0.04 * c;
          const double i = subthreshold_current(m, vgs, vds);
          CHECK(subthreshold_current(m, vgs + 0.01, vds) > i);
          CHECK(subthreshold_current(m, vgs, vds + 0.01) > i);
          TechnologyModel higher = m;
          higher.vth0 += 0.01;
          CHECK(subthreshold_current(higher, vgs, vds) < i);
        }
  }

  TEST_CASE("log current is affine in vgs with slope 1/(n vT)")
  {
    const TechnologyModel m = default_model();
    const double expected = 1.0 / (m.n_slope * thermal_voltage(m.temperature_k));
    for (double vgs = -0.3; vgs < 0.3; vgs += 0.05) {
      const double slope =
          (std::log(subthreshold_current(m, vgs + 0.01, 1.2)) - std::log(subthreshold_current(m, vgs, 1.2))) / 0.01;
      CHECK(rel(slope, expected) < 1e-6);
    }
  }

  TEST_CASE("stack node voltage")
  {
    const TechnologyModel m = default_model();
    const double vx = stack_intermediate_voltage(m, 1.2);
    CHECK(vx > 0.0);
    CHECK(vx < 1.2);
    CHECK(std::abs(vx - kStackNodeVoltage) < 1e-6);
    const double top = subthreshold_current(m, -vx, 1.2 - vx);
    const double bottom = subthreshold_current(m, 0.0, vx);
    CHECK(std::abs(top - bottom) / bottom <= 1e-6);

    TechnologyModel doubled = m;
    doubled.i0 *= 2.0;
    CHECK(std::abs(stack_intermediate_voltage(doubled, 1.2) - vx) < 1e-9);
    CHECK_THROWS_AS(stack_intermediate_voltage(m, 0.0), DomainError);
  }

  TEST_CASE("stack leakage")
  {
    const TechnologyModel m = default_model();
    const StackLeakage single = stack_leakage(m, 1.2, 1);
    CHECK(single.stack_factor == 1.0);
    CHECK(single.current_a == subthreshold_current(m, 0.0, 1.2));

    const StackLeakage two = stack_leakage(m, 1.2, 2);
    CHECK(two.stack_factor > 1.0);
    CHECK(rel(two.stack_factor, kStackFactor) < 1e-5);
    CHECK(rel(two.current_a * two.stack_factor, single.current_a) < 1e-12);

    CHECK_THROWS_AS(stack_leakage(m, 1.2, 3), DomainError);
    CHECK_THROWS_AS(stack_leakage(m, 1.2, 0), DomainError);
  }

  TEST_CASE("stack factor exceeds one on random models")
  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
      TechnologyModel m = default_model();
      m.vth0 = 0.2 + 0.4 * u(rng);
      m.eta_dibl = 0.15 * u(rng);
      m.n_slope = 1.0 + u(rng);
      const double vdd = 0.5 + u(rng);
      CHECK(stack_leakage(m, vdd, 2).stack_factor > 1.0);
    }
  }

  TEST_CASE("delay scale factor")
  {
    const TechnologyModel m = default_model();
    const OperatingPoint ref{1.2, 1e8, 300.0};
    CHECK(delay_scale_factor(m, ref, ref) == 1.0);
    const double f = delay_scale_factor(m, {0.9, 1e8, 300.0}, ref);
    CHECK(std::abs(f - 1.382) / 1.382 < 0.005);
    CHECK(rel(f, kDelayFactor09) < 1e-12);
    CHECK_THROWS_AS(delay_scale_factor(m, {0.4, 1e8, 300.0}, ref), DomainError);
    CHECK_THROWS_AS(delay_scale_factor(m, ref, {0.3, 1e8, 300.0}), DomainError);
  }

  TEST_CASE("delay scale factor monotonicity")
  {
    const OperatingPoint ref{1.2, 1e8, 300.0};
    for (double vth = 0.2; vth < 0.55; vth += 0.05) {
      TechnologyModel m = default_model();
      m.vth0 = vth;
      double prev = delay_scale_factor(m, {vth + 0.05, 1e8, 300.0}, ref);
      for (double vdd = vth + 0.1; vdd < 2.0; vdd += 0.05) {
        const double f = delay_scale_factor(m, {vdd, 1e8, 300.0}, ref);
        CHECK(f < prev);
        prev = f;
      }
    }
    // Raising the evaluated threshold slows the device at fixed supply.
    double prev = delay_scale_factor(1.3, 1.0, 0.2, 1.2, 0.4);
    for (double vth = 0.25; vth < 0.9; vth += 0.05) {
      const double f = delay_scale_factor(1.3, 1.0, vth, 1.2, 0.4);
      CHECK(f > prev);
      prev = f;
    }
  }

  TEST_CASE("calibrate i0 round trip")
  {
    const TechnologyModel base = default_model();
    for (double target_nw : {3.98, 5.00, 16.02, 3.15}) {
      TechnologyModel m = base;
      m.i0 = calibrate_i0(base, target_nw * 1e-9, 1.2);
      CHECK(rel(1.2 * subthreshold_current(m, 0.0, 1.2), target_nw * 1e-9) < 1e-12);
    }
    CHECK(rel(calibrate_i0(base, 2 * 3.98e-9, 1.2), 2 * calibrate_i0(base, 3.98e-9, 1.2)) < 1e-15);
    CHECK_THROWS_AS(calibrate_i0(base, 0.0, 1.2), DomainError);
    CHECK_THROWS_AS(calibrate_i0(base, 1e-9, 0.0), DomainError);
  }

  TEST_CASE("operations are pure")
  {
    const TechnologyModel m = default_model();
    CHECK(stack_intermediate_voltage(m, 1.1) == stack_intermediate_voltage(m, 1.1));
    CHECK(subthreshold_current(m, 0.1, 0.7) == subthreshold_current(m, 0.1, 0.7));
  }

  TEST_CASE("model invariants")
  {
    CHECK(check_invariants(default_model()).empty());
    TechnologyModel m = default_model();
    m.n_slope = 0.9;
    CHECK(check_invariants(m) == "n_slope >= 1");
    m = default_model();
    m.eta_dibl = 1.0;
    CHECK(check_invariants(m) == "0 <= eta_dibl < 1");
    CHECK(check_invariants(OperatingPoint{0.0, 1e8, 300}) == "vdd > 0");
  }
}
