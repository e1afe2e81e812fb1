#include "lowpower/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowpower/activity.hpp"
#include "lowpower/analysis.hpp"
#include "lowpower/cell_library.hpp"
#include "lowpower/errors.hpp"
#include "lowpower/netlist.hpp"
#include "lowpower/optimizer.hpp"

namespace lowpower::cli {

using nlohmann::ordered_json;

namespace {

// Raised for failures that map to exit code 1 after their text is printed.
struct DiagnosticFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string netlist_path;
  std::string library_path;  // empty: builtin
  std::string activity_path;
  std::string assignment_path;
  std::optional<double> vdd;
  std::optional<double> frequency;
  std::optional<double> vth;
  std::string corner = "TT";
  std::string vdd_range;
  std::string vth_range;
  std::string delay_budget;
  std::optional<double> k_sc;
  std::string leakage_source = "model";
  std::string output_path;
  std::string assign_out_path;
  std::string output_format = "json";
  bool lenient = false;
};

double rounded(double v)
{
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

ordered_json num(double v)
{
  if (!std::isfinite(v)) return nullptr;
  return rounded(v);
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DiagnosticFailure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so a failed run never leaves a partial report behind.
void write_atomic(const std::string& path, const std::string& content)
{
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DiagnosticFailure("cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) throw DiagnosticFailure("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DiagnosticFailure("cannot move report into place at " + path);
  }
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out)
{
  if (cfg.output_path.empty())
    out << content;
  else
    write_atomic(cfg.output_path, content);
}

Library load_library_or_fail(const RunConfig& cfg, std::ostream& err)
{
  if (cfg.library_path.empty()) return builtin_reference_library();
  auto result = load_library(read_file(cfg.library_path),
                             cfg.lenient ? SchemaMode::lenient : SchemaMode::strict);
  for (const auto& issue : result.issues) err << cfg.library_path << ": " << issue.to_string() << '\n';
  if (!result.ok()) throw DiagnosticFailure("library rejected");
  return *result.library;
}

void print_diagnostics(const std::string& path, const std::vector<Diagnostic>& diags, std::ostream& err)
{
  for (const auto& d : diags) {
    err << path << ':';
    if (d.line > 0) err << d.line << ':';
    err << ' ' << d.message << '\n';
  }
}

Netlist load_netlist_or_fail(const RunConfig& cfg, const Library& lib, std::ostream& err)
{
  auto parsed = parse_netlist(read_file(cfg.netlist_path), signatures_of(lib));
  if (!parsed.ok()) {
    print_diagnostics(cfg.netlist_path, parsed.diagnostics, err);
    throw DiagnosticFailure("netlist rejected");
  }
  Netlist nl = std::move(*parsed.netlist);
  if (!cfg.assignment_path.empty()) {
    auto diags = apply_assignment_text(nl, read_file(cfg.assignment_path));
    if (!diags.empty()) {
      print_diagnostics(cfg.assignment_path, diags, err);
      throw DiagnosticFailure("assignment rejected");
    }
  }
  auto diags = validate(nl, lib);
  if (!diags.empty()) {
    print_diagnostics(cfg.netlist_path, diags, err);
    throw DiagnosticFailure("netlist does not match library");
  }
  return nl;
}

InputProbabilities load_probabilities_or_fail(const RunConfig& cfg, const Netlist& nl, std::ostream& err)
{
  InputProbabilities given;
  if (!cfg.activity_path.empty()) {
    auto parsed = parse_activity_file(read_file(cfg.activity_path));
    if (!parsed.diagnostics.empty()) {
      print_diagnostics(cfg.activity_path, parsed.diagnostics, err);
      throw DiagnosticFailure("activity file rejected");
    }
    const auto nets = nl.nets();
    for (const auto& [net, p] : parsed.probabilities)
      if (std::find(nl.primary_inputs.begin(), nl.primary_inputs.end(), net) == nl.primary_inputs.end()) {
        err << cfg.activity_path << ": probability given for " << net << ", which is not a primary input\n";
        throw DiagnosticFailure("activity file rejected");
      }
    given = parsed.probabilities;
  }
  return with_default_inputs(nl, given);
}

Conditions conditions_from(const RunConfig& cfg, const Library& lib)
{
  Conditions cond = reference_conditions(lib);
  if (cfg.vdd) cond.op.vdd = *cfg.vdd;
  if (cfg.frequency) cond.op.frequency = *cfg.frequency;
  cond.vth0 = cfg.vth;
  cond.corner = lib.corner(cfg.corner);
  cond.leakage_source = *parse_leakage_source(cfg.leakage_source);
  cond.k_sc = cfg.k_sc;
  return cond;
}

ordered_json conditions_json(const Conditions& cond, const Library& lib)
{
  ordered_json j;
  j["vdd"] = num(cond.op.vdd);
  j["frequency"] = num(cond.op.frequency);
  j["temperature_k"] = num(cond.op.temperature_k);
  j["vth0"] = num(cond.vth0.value_or(lib.technology.vth0));
  j["corner"] = cond.corner.name;
  j["leakage_source"] = std::string(to_string(cond.leakage_source));
  j["k_sc"] = num(cond.k_sc.value_or(lib.short_circuit_fraction));
  return j;
}

ordered_json breakdown_json(const PowerBreakdown& b)
{
  return ordered_json{{"p_switching_w", num(b.switching_w)},
                      {"p_short_circuit_w", num(b.short_circuit_w)},
                      {"p_leakage_w", num(b.leakage_w)},
                      {"p_total_w", num(b.total_w)}};
}

ordered_json power_json(const PowerReport& p)
{
  ordered_json j = breakdown_json(p.total);
  ordered_json per = ordered_json::object();
  for (const auto& ip : p.per_instance) per[ip.id] = breakdown_json(ip.power);
  j["per_instance"] = per;
  return j;
}

ordered_json timing_json(const TimingReport& t, const Netlist& nl, bool with_arrivals)
{
  ordered_json j;
  j["critical_delay_ns"] = num(t.critical_delay_ns);
  j["critical_output"] = t.critical_output;
  j["critical_path"] = t.critical_path;
  ordered_json po = ordered_json::object();
  for (const auto& n : nl.primary_outputs) po[n] = num(t.arrival_ns.at(n));
  j["output_arrival_ns"] = po;
  if (with_arrivals) {
    ordered_json arr = ordered_json::object();
    for (const auto& n : nl.nets()) arr[n] = num(t.arrival_ns.at(n));
    j["arrival_ns"] = arr;
  }
  return j;
}

ordered_json instances_json(const Netlist& nl, const Library& lib, const Conditions& cond, double& area)
{
  ordered_json arr = ordered_json::array();
  area = 0.0;
  const auto load = net_capacitance_ff(nl, lib);
  for (const auto& inst : nl.instances) {
    const Cell& cell = lib.at(inst.cell_name, inst.variant);
    const EffectiveCell eff = derate_cell(cell, lib, cond.op, cond.corner, cond.derate_options());
    ordered_json j;
    j["id"] = inst.id;
    j["cell"] = inst.cell_name;
    j["variant"] = std::string(to_string(inst.variant));
    j["area_um2"] = num(cell.area_um2);
    j["leakage_nw"] = num(eff.leakage_nw);
    ordered_json delay = ordered_json::object();
    for (std::size_t k = 0; k < cell.outputs.size(); ++k)
      delay[cell.outputs[k]] = num(eff.delay_ns[k] + eff.load_coeff_ns_per_ff * load.at(inst.output_nets[k]));
    j["delay_ns"] = delay;
    if (cell.ref_dynamic_pw) j["ref_dynamic_pw"] = num(*cell.ref_dynamic_pw);
    arr.push_back(j);
    area += cell.area_um2;
  }
  return arr;
}

const char* kCsvHeader = "vdd,vth,corner,p_sw_w,p_sc_w,p_leak_w,p_total_w,delay_ns,feasible\n";

std::string csv_row(double vdd, double vth, const std::string& corner, const PowerReport& p,
                    const TimingReport& t, bool feasible)
{
  std::ostringstream os;
  os << format_number(vdd) << ',' << format_number(vth) << ',' << corner << ','
     << format_number(p.total.switching_w) << ',' << format_number(p.total.short_circuit_w) << ','
     << format_number(p.total.leakage_w) << ',' << format_number(p.total.total_w) << ','
     << format_number(t.critical_delay_ns) << ',' << (feasible ? "true" : "false") << '\n';
  return os.str();
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Subcommands

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  const Library lib = load_library_or_fail(cfg, err);
  if (cfg.netlist_path.empty()) {
    out << "library ok: " << lib.cells.size() << " cells\n";
    return kSuccess;
  }
  const Netlist nl = load_netlist_or_fail(cfg, lib, err);
  load_probabilities_or_fail(cfg, nl, err);
  out << "netlist ok: " << nl.instances.size() << " instances, " << nl.nets().size() << " nets, "
      << nl.primary_inputs.size() << " inputs, " << nl.primary_outputs.size() << " outputs\n";
  return kSuccess;
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  const Library lib = load_library_or_fail(cfg, err);
  const Netlist nl = load_netlist_or_fail(cfg, lib, err);
  const auto activity = propagate_probabilities(nl, lib, load_probabilities_or_fail(cfg, nl, err));
  const Conditions cond = conditions_from(cfg, lib);
  const PowerReport power = total_power(nl, lib, activity, cond);
  const TimingReport timing = static_timing(nl, lib, cond);

  if (cfg.output_format == "csv") {
    emit(cfg, kCsvHeader + csv_row(cond.op.vdd, cond.vth0.value_or(lib.technology.vth0),
                                   cond.corner.name, power, timing, true),
         out);
    return kSuccess;
  }
  ordered_json j;
  j["command"] = "estimate";
  j["conditions"] = conditions_json(cond, lib);
  j["timing"] = timing_json(timing, nl, true);
  j["power"] = power_json(power);
  double area = 0.0;
  j["instances"] = instances_json(nl, lib, cond, area);
  j["area_um2"] = num(area);
  ordered_json act = ordered_json::object();
  for (const auto& n : nl.nets())
    act[n] = ordered_json{{"p_one", num(activity.at(n).p_one)}, {"toggle_rate", num(activity.at(n).toggle_rate)}};
  j["activity"] = act;
  emit(cfg, dump(j), out);
  return kSuccess;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  const auto vdd_grid = parse_range(cfg.vdd_range);
  const auto vth_grid = parse_range(cfg.vth_range);
  const Library lib = load_library_or_fail(cfg, err);
  const Netlist nl = load_netlist_or_fail(cfg, lib, err);
  const auto activity = propagate_probabilities(nl, lib, load_probabilities_or_fail(cfg, nl, err));
  const Conditions cond = conditions_from(cfg, lib);
  const auto points = sweep(nl, lib, activity, vdd_grid, vth_grid, cond);

  if (cfg.output_format == "csv") {
    std::string text = kCsvHeader;
    for (const auto& pt : points) text += csv_row(pt.vdd, pt.vth, cond.corner.name, pt.power, pt.timing, pt.feasible);
    emit(cfg, text, out);
    return kSuccess;
  }
  ordered_json j;
  j["command"] = "sweep";
  j["conditions"] = conditions_json(cond, lib);
  ordered_json arr = ordered_json::array();
  for (const auto& pt : points) {
    ordered_json p;
    p["vdd"] = num(pt.vdd);
    p["vth"] = num(pt.vth);
    p["feasible"] = pt.feasible;
    ordered_json b = breakdown_json(pt.power.total);
    for (auto& [k, v] : b.items()) p[k] = v;
    p["delay_ns"] = num(pt.timing.critical_delay_ns);
    arr.push_back(p);
  }
  j["points"] = arr;
  emit(cfg, dump(j), out);
  return kSuccess;
}

int cmd_corners(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  const Library lib = load_library_or_fail(cfg, err);
  const Netlist nl = load_netlist_or_fail(cfg, lib, err);
  const auto activity = propagate_probabilities(nl, lib, load_probabilities_or_fail(cfg, nl, err));
  const Conditions cond = conditions_from(cfg, lib);
  const auto results = corner_analysis(nl, lib, activity, cond);
  const double vth = cond.vth0.value_or(lib.technology.vth0);

  if (cfg.output_format == "csv") {
    std::string text = kCsvHeader;
    for (const auto& r : results) text += csv_row(cond.op.vdd, vth, r.corner.name, r.power, r.timing, true);
    emit(cfg, text, out);
    return kSuccess;
  }
  ordered_json j;
  j["command"] = "corners";
  j["conditions"] = conditions_json(cond, lib);
  ordered_json arr = ordered_json::array();
  for (const auto& r : results) {
    ordered_json c;
    c["corner"] = r.corner.name;
    c["vth_shift_frac"] = num(r.corner.vth_shift_frac);
    c["delay_derate"] = num(r.corner.delay_derate);
    c["power"] = power_json(r.power);
    c["timing"] = timing_json(r.timing, nl, false);
    arr.push_back(c);
  }
  j["corners"] = arr;
  emit(cfg, dump(j), out);
  return kSuccess;
}

double parse_budget(const std::string& text)
{
  if (text == "inf" || text == "infinity") return kUnboundedBudget;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v > 0.0)) throw std::invalid_argument("--delay-budget must be a positive number or 'inf'");
  return v;
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  const double budget = parse_budget(cfg.delay_budget);
  const Library lib = load_library_or_fail(cfg, err);
  const Netlist nl = load_netlist_or_fail(cfg, lib, err);
  const auto activity = propagate_probabilities(nl, lib, load_probabilities_or_fail(cfg, nl, err));
  const Conditions cond = conditions_from(cfg, lib);
  const OptimizeResult result = optimize_leakage(nl, lib, activity, cond, budget);

  const Netlist optimized = apply_assignment(nl, result.assignment);
  if (!cfg.assign_out_path.empty()) write_atomic(cfg.assign_out_path, assignment_text(nl, result.assignment));

  ordered_json j;
  j["command"] = "optimize";
  j["conditions"] = conditions_json(cond, lib);
  j["delay_budget_ns"] = num(budget);
  j["feasible"] = result.feasible;
  j["moves_accepted"] = result.moves_accepted;
  j["leakage_w"] = num(result.leakage_w);
  j["critical_delay_ns"] = num(result.critical_delay_ns);
  ordered_json assign = ordered_json::object();
  for (std::size_t i = 0; i < nl.instances.size(); ++i)
    assign[nl.instances[i].id] = std::string(to_string(result.assignment[i]));
  j["assignment"] = assign;
  j["power"] = power_json(total_power(optimized, lib, activity, cond));
  emit(cfg, dump(j), out);
  return kSuccess;
}

int cmd_emit_library(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  emit(cfg, save_library(load_library_or_fail(cfg, err)), out);
  return kSuccess;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool netlist_required)
{
  auto* opt = sub->add_option("netlist", cfg.netlist_path, "Netlist file");
  if (netlist_required) opt->required();
  sub->add_option("--library", cfg.library_path, "Library JSON file (default: built-in reference library)");
  sub->add_flag("--lenient", cfg.lenient, "Accept unknown library keys with a warning");
  sub->add_option("--activity", cfg.activity_path, "Primary-input probabilities (prob <net> <p>); default 0.5");
}

void add_conditions(CLI::App* sub, RunConfig& cfg)
{
  sub->add_option("--assignment", cfg.assignment_path, "Variant assignment file (assign <id> <variant>)");
  sub->add_option("--vdd", cfg.vdd, "Supply voltage, V (default: library reference)")->check(CLI::PositiveNumber);
  sub->add_option("--frequency", cfg.frequency, "Clock frequency, Hz")->check(CLI::PositiveNumber);
  sub->add_option("--vth", cfg.vth, "Nominal threshold voltage override, V")->check(CLI::PositiveNumber);
  sub->add_option("--corner", cfg.corner, "Process corner")->check(CLI::IsMember({"TT", "FF", "SS", "FS", "SF"}));
  sub->add_option("--k-sc", cfg.k_sc, "Short-circuit power fraction of switching power")->check(CLI::NonNegativeNumber);
  sub->add_option("--leakage-source", cfg.leakage_source, "Stacked-cell leakage: table or model")
      ->check(CLI::IsMember({"table", "model"}));
  sub->add_option("--out", cfg.output_path, "Report file (default: standard output)");
}

} // namespace

std::string format_number(double value)
{
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::vector<double> parse_range(const std::string& text)
{
  const auto first = text.find(':');
  const auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
  if (second == std::string::npos || text.find(':', second + 1) != std::string::npos)
    throw std::invalid_argument("range must be start:stop:step, got '" + text + "'");
  auto parse = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != part.size() || !std::isfinite(v))
      throw std::invalid_argument("range must be start:stop:step, got '" + text + "'");
    return v;
  };
  const double start = parse(text.substr(0, first));
  const double stop = parse(text.substr(first + 1, second - first - 1));
  const double step = parse(text.substr(second + 1));
  if (!(step > 0.0)) throw std::invalid_argument("range step must be positive: '" + text + "'");
  if (!(start <= stop)) throw std::invalid_argument("range start must not exceed stop: '" + text + "'");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> values;
  values.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    values.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  return values;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  RunConfig cfg;
  CLI::App app{"Gate-level low-power analysis: timing, power, corners, voltage sweeps, stacking optimization",
               "lowpower"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Validate a library and optionally a netlist; writes no report");
  add_common(check, cfg, false);

  auto* estimate = app.add_subcommand("estimate", "Timing and power at one operating point");
  add_common(estimate, cfg, true);
  add_conditions(estimate, cfg);
  estimate->add_option("--format", cfg.output_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Power and delay over a (vdd, vth) grid");
  add_common(sweep_cmd, cfg, true);
  add_conditions(sweep_cmd, cfg);
  sweep_cmd->add_option("--vdd-range", cfg.vdd_range, "start:stop:step, V")->required();
  sweep_cmd->add_option("--vth-range", cfg.vth_range, "start:stop:step, V")->required();
  sweep_cmd->add_option("--format", cfg.output_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* corners = app.add_subcommand("corners", "Power and delay at every process corner");
  add_common(corners, cfg, true);
  add_conditions(corners, cfg);
  corners->add_option("--format", cfg.output_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* optimize = app.add_subcommand("optimize", "Delay-constrained stacked-variant assignment");
  add_common(optimize, cfg, true);
  add_conditions(optimize, cfg);
  optimize->add_option("--delay-budget", cfg.delay_budget, "Critical-delay budget, ns (or 'inf')")->required();
  optimize->add_option("--assign-out", cfg.assign_out_path, "Write 'assign <id> <variant>' lines here");

  auto* emit_library = app.add_subcommand("emit-library", "Write the library as JSON");
  emit_library->add_option("--library", cfg.library_path, "Source library (default: built-in)");
  emit_library->add_flag("--lenient", cfg.lenient, "Accept unknown library keys with a warning");
  emit_library->add_option("--out", cfg.output_path, "Output file (default: standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    if (cfg.subcommand == "check") return cmd_check(cfg, out, err);
    if (cfg.subcommand == "estimate") return cmd_estimate(cfg, out, err);
    if (cfg.subcommand == "sweep") return cmd_sweep(cfg, out, err);
    if (cfg.subcommand == "corners") return cmd_corners(cfg, out, err);
    if (cfg.subcommand == "optimize") return cmd_optimize(cfg, out, err);
    if (cfg.subcommand == "emit-library") return cmd_emit_library(cfg, out, err);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DiagnosticFailure& e) {
    err << "error: " << e.what() << '\n';
    return kDiagnostics;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDiagnostics;
  }
  return kUsage;
}

} // namespace lowpower::cli
