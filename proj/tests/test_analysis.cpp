#include <doctest.h>

#include <cmath>
#include <random>

#include "lowpower/analysis.hpp"
#include "lowpower/errors.hpp"
#include "test_support.hpp"

using namespace lowpower;

namespace {

// Independently evaluated with tests/oracles/device_oracle.py.
constexpr double kNotDelay = 30.327;
constexpr double kTwoNotChain = 60.713928;
constexpr double kNotDelayAt09 = 41.9031519823459;

const Library& lib()
{
  static const Library l = builtin_reference_library();
  return l;
}

Netlist parse(const std::string& text)
{
  auto r = parse_netlist(text);
  REQUIRE(r.ok());
  return *r.netlist;
}

Conditions at_vdd(double vdd)
{
  Conditions c = reference_conditions(lib());
  c.op.vdd = vdd;
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ActivityMap half_activity(const Netlist& nl)
{
  return propagate_probabilities(nl, lib(), with_default_inputs(nl, {}));
}

} // namespace

TEST_SUITE("analysis")
{
  TEST_CASE("single inverter timing")
  {
    const Netlist nl = parse("input a\noutput y\ngate g1 NOT a -> y\n");
    const auto t = static_timing(nl, lib(), reference_conditions(lib()));
    CHECK(std::abs(t.critical_delay_ns - kNotDelay) < 1e-9);
    CHECK(t.critical_output == "y");
    CHECK(t.critical_path == std::vector<std::string>{"g1"});
    CHECK(t.arrival_ns.at("a") == 0.0);

    const auto slow = static_timing(nl, lib(), at_vdd(0.9));
    CHECK(rel(slow.critical_delay_ns, kNotDelayAt09) < 1e-9);
  }

  TEST_CASE("two inverter chain")
  {
    const Netlist nl = parse("input a\noutput y\ngate g1 NOT a -> m\ngate g2 NOT m -> y\n");
    const auto t = static_timing(nl, lib(), reference_conditions(lib()));
    CHECK(std::abs(t.critical_delay_ns - kTwoNotChain) < 1e-9);
    CHECK(t.critical_path == std::vector<std::string>{"g1", "g2"});
  }

  TEST_CASE("wire-through output has zero delay")
  {
    const Netlist nl = parse("input a\noutput a\n");
    const auto t = static_timing(nl, lib(), reference_conditions(lib()));
    CHECK(t.critical_delay_ns == 0.0);
    CHECK(t.critical_path.empty());
  }

  TEST_CASE("timing matches path enumeration")
  {
    std::mt19937_64 rng(41);
    for (int k = 0; k < 200; ++k) {
      Netlist nl = testing::random_dag_netlist(rng, 1 + k % 20, 1 + k % 6);
      for (auto& inst : nl.instances)
        if (rng() % 3 == 0) inst.variant = Variant::stacked;
      Conditions cond = reference_conditions(lib());
      cond.op.vdd = 0.8 + 0.1 * (k % 6);
      cond.corner = lib().corners[k % lib().corners.size()];

      // Arc delays straight from the cell data, without the timing graph.
      const auto caps = net_capacitance_ff(nl, lib());
      std::vector<EffectiveCell> eff;
      for (const auto& inst : nl.instances)
        eff.push_back(derate_cell(lib().at(inst.cell_name, inst.variant), lib(), cond.op, cond.corner,
                                  cond.derate_options()));
      auto arc = [&](std::size_t i, std::size_t pin) {
        return eff[i].delay_ns[pin] + eff[i].load_coeff_ns_per_ff * caps.at(nl.instances[i].output_nets[pin]);
      };
      const double expected = testing::path_enumeration_delay(nl, arc);
      const double got = static_timing(nl, lib(), cond).critical_delay_ns;
      CHECK(std::abs(got - expected) <= 1e-9 * std::max(1.0, expected));
    }
  }

  TEST_CASE("switching power")
  {
    // NAND at p = 0.5 toggles 0.375 per cycle; 10 fF at 1.2 V and 100 MHz.
    const Netlist nl = parse("input a b\noutput y\nload y 10\ngate g1 NAND a b -> y\n");
    const auto act = half_activity(nl);
    const auto p = dynamic_power(nl, lib(), act, lib().ref_point);
    CHECK(rel(p.total_w, 540e-9) < 1e-12);
    CHECK(p.per_instance_w.size() == 1);

    ActivityMap idle = act;
    idle["y"].toggle_rate = 0.0;
    CHECK(dynamic_power(nl, lib(), idle, lib().ref_point).total_w == 0.0);

    OperatingPoint doubled = lib().ref_point;
    doubled.vdd *= 2.0;
    CHECK(rel(dynamic_power(nl, lib(), act, doubled).total_w, 4.0 * p.total_w) < 1e-12);
    OperatingPoint fast = lib().ref_point;
    fast.frequency *= 3.0;
    CHECK(rel(dynamic_power(nl, lib(), act, fast).total_w, 3.0 * p.total_w) < 1e-12);

    CHECK_THROWS_AS(dynamic_power(nl, lib(), ActivityMap{}, lib().ref_point), DomainError);
  }

  TEST_CASE("fanout capacitance")
  {
    const Netlist nl = parse("input a\noutput y z\nload m 2\ngate g1 NOT a -> m\ngate g2 NOT m -> y\ngate g3 NAND m a -> z\n");
    const auto caps = net_capacitance_ff(nl, lib());
    CHECK(caps.at("m") == doctest::Approx(2.0 + 1.32 + 3.322));
    CHECK(caps.at("a") == doctest::Approx(1.32 + 3.322));
    CHECK(caps.at("y") == 0.0);
  }

  TEST_CASE("leakage at the reference point")
  {
    const Netlist inv = parse("input a\noutput y\ngate g1 NOT a -> y\n");
    const Netlist inv_s = parse("input a\noutput y\ngate g1 NOT:stacked a -> y\n");
    const Conditions ref = reference_conditions(lib());
    CHECK(rel(leakage_power(inv, lib(), ref).total_w, 3.98e-9) < 1e-12);
    CHECK(rel(leakage_power(inv_s, lib(), ref).total_w, 5.75e-9) < 1e-12);

    Conditions model = ref;
    model.leakage_source = LeakageSource::model;
    CHECK(rel(leakage_power(inv, lib(), model).total_w, 3.98e-9) < 1e-12);
    CHECK(leakage_power(inv_s, lib(), model).total_w < 3.98e-9 / 5.0);

    Conditions ff = ref;
    ff.corner = lib().corner("FF");
    Conditions ss = ref;
    ss.corner = lib().corner("SS");
    CHECK(leakage_power(inv, lib(), ff).total_w > leakage_power(inv, lib(), ref).total_w);
    CHECK(leakage_power(inv, lib(), ss).total_w < leakage_power(inv, lib(), ref).total_w);
    CHECK(leakage_power(inv, lib(), at_vdd(1.0)).total_w < leakage_power(inv, lib(), ref).total_w);
  }

  TEST_CASE("short-circuit power")
  {
    CHECK(rel(short_circuit_power(540e-9), 54e-9) < 1e-12);
    CHECK(short_circuit_power(0.0) == 0.0);
    CHECK(short_circuit_power(2e-6, 0.25) == doctest::Approx(5e-7));
    for (double p : {1e-9, 3e-7, 2e-3}) CHECK(rel(short_circuit_power(2 * p), 2 * short_circuit_power(p)) < 1e-15);
    CHECK_THROWS_AS(short_circuit_power(-1.0), DomainError);
    CHECK_THROWS_AS(short_circuit_power(1.0, -0.1), DomainError);
  }

  TEST_CASE("power decomposition")
  {
    std::mt19937_64 rng(43);
    for (int k = 0; k < 100; ++k) {
      Netlist nl = testing::random_dag_netlist(rng, 1 + k % 20, 1 + k % 6);
      for (auto& inst : nl.instances)
        if (rng() % 2) inst.variant = Variant::stacked;
      Conditions cond = at_vdd(0.8 + 0.05 * (k % 10));
      cond.leakage_source = k % 2 ? LeakageSource::model : LeakageSource::table;
      if (k % 3 == 0) cond.k_sc = 0.2;
      const auto report = total_power(nl, lib(), half_activity(nl), cond);
      const auto& t = report.total;
      CHECK(t.switching_w >= 0.0);
      CHECK(t.leakage_w > 0.0);
      CHECK(rel(t.total_w, t.switching_w + t.short_circuit_w + t.leakage_w) < 1e-12);
      CHECK(rel(t.short_circuit_w + 1e-300, cond.k_sc.value_or(0.1) * t.switching_w + 1e-300) < 1e-12);
      double sw = 0.0, sc = 0.0, leak = 0.0, total = 0.0;
      for (const auto& ip : report.per_instance) {
        sw += ip.power.switching_w;
        sc += ip.power.short_circuit_w;
        leak += ip.power.leakage_w;
        total += ip.power.total_w;
      }
      CHECK(std::abs(sw - t.switching_w) <= 1e-12 * t.total_w);
      CHECK(std::abs(sc - t.short_circuit_w) <= 1e-12 * t.total_w);
      CHECK(std::abs(leak - t.leakage_w) <= 1e-12 * t.total_w);
      CHECK(std::abs(total - t.total_w) <= 1e-12 * t.total_w);
    }
  }

  TEST_CASE("single point sweep matches a direct estimate")
  {
    const Netlist nl = parse(testing::read_text(testing::samples_dir() + "/fulladder.net"));
    const auto act = half_activity(nl);
    const double vdd[] = {1.0};
    const double vth[] = {0.35};
    Conditions base = reference_conditions(lib());
    const auto pts = sweep(nl, lib(), act, vdd, vth, base);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].feasible);
    Conditions direct = base;
    direct.op.vdd = 1.0;
    direct.vth0 = 0.35;
    CHECK(pts[0].power.total.total_w == total_power(nl, lib(), act, direct).total.total_w);
    CHECK(pts[0].timing.critical_delay_ns == static_timing(nl, lib(), direct).critical_delay_ns);
  }

  TEST_CASE("sweep trends")
  {
    const Netlist nl = parse(testing::read_text(testing::samples_dir() + "/fulladder.net"));
    const auto act = half_activity(nl);
    const std::vector<double> vdd = {0.8, 0.9, 1.0, 1.1, 1.2};
    const std::vector<double> vth = {0.25, 0.3, 0.35, 0.4, 0.45};
    const auto pts = sweep(nl, lib(), act, vdd, vth, reference_conditions(lib()));
    REQUIRE(pts.size() == 25);
    auto at = [&](std::size_t i, std::size_t j) -> const SweepPoint& { return pts[i * vth.size() + j]; };
    for (std::size_t i = 0; i < vdd.size(); ++i)
      for (std::size_t j = 0; j < vth.size(); ++j) {
        CHECK(at(i, j).vdd == vdd[i]);
        CHECK(at(i, j).vth == vth[j]);
        REQUIRE(at(i, j).feasible);
        if (j + 1 < vth.size()) {
          CHECK(at(i, j + 1).power.total.leakage_w < at(i, j).power.total.leakage_w);
          CHECK(at(i, j + 1).timing.critical_delay_ns > at(i, j).timing.critical_delay_ns);
        }
        if (i + 1 < vdd.size()) {
          CHECK(at(i + 1, j).power.total.switching_w > at(i, j).power.total.switching_w);
          CHECK(at(i + 1, j).timing.critical_delay_ns < at(i, j).timing.critical_delay_ns);
        }
      }

    const double low[] = {0.3};
    const double high[] = {0.4};
    const auto bad = sweep(nl, lib(), act, low, high, reference_conditions(lib()));
    CHECK_FALSE(bad[0].feasible);
    CHECK(bad[0].power.total.total_w == 0.0);
    CHECK_THROWS_AS(sweep(nl, lib(), act, std::span<const double>{}, high, reference_conditions(lib())),
                    DomainError);
  }

  TEST_CASE("corner analysis ordering")
  {
    const Netlist nl = parse(testing::read_text(testing::samples_dir() + "/fulladder.net"));
    const auto res = corner_analysis(nl, lib(), half_activity(nl), reference_conditions(lib()));
    REQUIRE(res.size() == 5);
    std::map<std::string, const CornerResult*> by;
    for (const auto& r : res) by[r.corner.name] = &r;
    CHECK(res[0].corner.name == "TT");
    CHECK(by["FF"]->power.total.leakage_w > by["TT"]->power.total.leakage_w);
    CHECK(by["TT"]->power.total.leakage_w > by["SS"]->power.total.leakage_w);
    CHECK(by["FF"]->timing.critical_delay_ns < by["TT"]->timing.critical_delay_ns);
    CHECK(by["TT"]->timing.critical_delay_ns < by["SS"]->timing.critical_delay_ns);
    CHECK(by["FS"]->power.total.leakage_w > by["TT"]->power.total.leakage_w);
    CHECK(by["SF"]->power.total.leakage_w < by["TT"]->power.total.leakage_w);
    CHECK(by["TT"]->power.total.switching_w == by["SS"]->power.total.switching_w);
  }

  TEST_CASE("timing graph reuses characterization")
  {
    const Netlist nl = parse(testing::read_text(testing::samples_dir() + "/fulladder.net"));
    const TimingGraph g(nl, lib(), reference_conditions(lib()), true);
    std::vector<Variant> all_stacked(g.instance_count(), Variant::stacked);
    Netlist stacked = nl;
    for (auto& inst : stacked.instances) inst.variant = Variant::stacked;
    CHECK(g.critical_delay(all_stacked) ==
          static_timing(stacked, lib(), reference_conditions(lib())).critical_delay_ns);
    CHECK(g.critical_delay(g.netlist_variants()) ==
          static_timing(nl, lib(), reference_conditions(lib())).critical_delay_ns);
    const TimingGraph only(nl, lib(), reference_conditions(lib()));
    CHECK_THROWS_AS(only.critical_delay(all_stacked), DomainError);
  }
}
