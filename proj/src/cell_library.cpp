#include "lowpower/cell_library.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lowpower/errors.hpp"

namespace lowpower {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Variant v)
{
  return v == Variant::stacked ? "stacked" : "conventional";
}

std::optional<Variant> parse_variant(std::string_view text)
{
  if (text == "conventional") return Variant::conventional;
  if (text == "stacked") return Variant::stacked;
  return std::nullopt;
}

std::string_view to_string(LeakageSource s)
{
  return s == LeakageSource::model ? "model" : "table";
}

std::optional<LeakageSource> parse_leakage_source(std::string_view text)
{
  if (text == "table") return LeakageSource::table;
  if (text == "model") return LeakageSource::model;
  return std::nullopt;
}

int Cell::input_index(std::string_view pin) const
{
  const auto it = std::find(inputs.begin(), inputs.end(), pin);
  return it == inputs.end() ? -1 : static_cast<int>(it - inputs.begin());
}

int Cell::output_index(std::string_view pin) const
{
  const auto it = std::find(outputs.begin(), outputs.end(), pin);
  return it == outputs.end() ? -1 : static_cast<int>(it - outputs.begin());
}

const Cell* Library::find(std::string_view name, Variant variant) const
{
  const auto it = cells.find(CellKey{std::string(name), variant});
  return it == cells.end() ? nullptr : &it->second;
}

const Cell& Library::at(std::string_view name, Variant variant) const
{
  if (const Cell* c = find(name, variant)) return *c;
  throw DomainError("library has no cell " + std::string(name) + "/" +
                    std::string(to_string(variant)));
}

const CornerSpec& Library::corner(std::string_view name) const
{
  for (const auto& c : corners)
    if (c.name == name) return c;
  throw DomainError("library has no corner " + std::string(name));
}

std::vector<TruthTable> compile_functions(const Cell& cell)
{
  std::vector<TruthTable> tables;
  tables.reserve(cell.outputs.size());
  for (const auto& out : cell.outputs) {
    const auto it = cell.functions.find(out);
    if (it == cell.functions.end())
      throw DomainError("cell " + cell.name + ": no function for output " + out);
    tables.push_back(compile_expression(it->second, cell.inputs));
  }
  return tables;
}

// ---------------------------------------------------------------------------
// Built-in reference library

namespace {

// Output load at which the loaded measurements were taken. Not published with
// the measurements; declared here and reflected in each cell's load_coeff.
constexpr double kNominalLoadFf = 10.0;
// Input capacitance per unit cell area.
constexpr double kCapPerAreaFfPerUm2 = 1.0;

struct Measurement {
  double area_um2;
  std::vector<double> delay_ns;  // per output
  double leakage_nw;
  std::optional<double> dynamic_pw;
};

struct ReferenceCell {
  const char* name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> functions;
  Measurement unloaded;  // conventional
  Measurement loaded;    // conventional at nominal load
  Measurement stacked;
};

const std::vector<ReferenceCell>& reference_cells()
{
  static const std::vector<ReferenceCell> cells = {
      {"NOT", {"a"}, {"y"}, {"!a"},
       {1.32, {30.327}, 3.98, std::nullopt},
       {1.32, {29.873}, 4.27, 20.801},
       {1.56, {32.873}, 5.75, 23.6805}},
      {"NAND", {"a", "b"}, {"y"}, {"!(a & b)"},
       {3.322, {30.339}, 5.00, std::nullopt},
       {3.322, {29.853}, 5.87, 33.782},
       {3.584, {32.853}, 6.79, 37.456}},
      {"FULLADDER", {"a", "b", "cin"}, {"S", "C"},
       {"a ^ b ^ cin", "(a & b) | (a & cin) | (b & cin)"},
       {17.89, {30.456, 30.768}, 16.02, std::nullopt},
       {20.85, {28.762, 28.666}, 21.91, 167.2793},
       {21.98, {30.62, 30.67}, 23.08, 176.880}},
      {"MUX1", {"a", "b", "sel"}, {"y"}, {"sel ? b : a"},
       {3.97, {29.635}, 3.15, std::nullopt},
       {4.93, {28.535}, 5.28, 40.943},
       {5.64, {28.535}, 6.99, 45.894}},
  };
  return cells;
}

Cell make_cell(const ReferenceCell& ref, Variant variant, double load_coeff)
{
  const Measurement& m = variant == Variant::stacked ? ref.stacked : ref.unloaded;
  Cell cell;
  cell.name = ref.name;
  cell.variant = variant;
  cell.inputs = ref.inputs;
  cell.outputs = ref.outputs;
  for (std::size_t k = 0; k < ref.outputs.size(); ++k) {
    cell.functions[ref.outputs[k]] = ref.functions[k];
    cell.intrinsic_delay_ns[ref.outputs[k]] = m.delay_ns[k];
  }
  cell.area_um2 = m.area_um2;
  for (const auto& pin : ref.inputs) cell.input_cap_ff[pin] = m.area_um2 * kCapPerAreaFfPerUm2;
  cell.load_coeff_ns_per_ff = load_coeff;
  cell.leakage_nw = m.leakage_nw;
  if (variant == Variant::stacked) {
    cell.ref_dynamic_pw = m.dynamic_pw;
  } else {
    cell.ref_dynamic_pw = ref.loaded.dynamic_pw;
    LoadMeasurement lm;
    lm.area_um2 = ref.loaded.area_um2;
    for (std::size_t k = 0; k < ref.outputs.size(); ++k)
      lm.delay_ns[ref.outputs[k]] = ref.loaded.delay_ns[k];
    lm.leakage_nw = ref.loaded.leakage_nw;
    lm.dynamic_pw = *ref.loaded.dynamic_pw;
    cell.load_measurement = lm;
  }
  return cell;
}

// Loaded and unloaded delays differ by the load term; the loaded figures are
// the smaller ones, so the magnitude of the shift is used.
double derive_load_coeff(const ReferenceCell& ref)
{
  double sum = 0.0;
  for (std::size_t k = 0; k < ref.outputs.size(); ++k)
    sum += std::abs(ref.unloaded.delay_ns[k] - ref.loaded.delay_ns[k]);
  return sum / static_cast<double>(ref.outputs.size()) / kNominalLoadFf;
}

} // namespace

Library builtin_reference_library()
{
  Library lib;
  lib.ref_point = OperatingPoint{1.2, 100.0e6, 300.0};
  lib.technology = TechnologyModel{};
  lib.technology.temperature_k = lib.ref_point.temperature_k;
  for (const auto& ref : reference_cells()) {
    const double coeff = derive_load_coeff(ref);
    for (Variant v : {Variant::conventional, Variant::stacked})
      lib.cells.emplace(CellKey{ref.name, v}, make_cell(ref, v, coeff));
  }
  // Anchor the absolute current scale to the conventional inverter.
  lib.technology.i0 = calibrate_i0(lib.technology,
                                   lib.at("NOT", Variant::conventional).leakage_nw * 1e-9,
                                   lib.ref_point.vdd);
  return lib;
}

// ---------------------------------------------------------------------------
// Validation

std::string LibraryIssue::to_string() const
{
  std::ostringstream os;
  switch (kind) {
  case Kind::parse:
    os << "parse error at line " << line << ", column " << column << ": " << message;
    return os.str();
  case Kind::schema: os << "schema violation"; break;
  case Kind::invariant: os << "invariant violation"; break;
  case Kind::warning: os << "warning"; break;
  }
  if (!subject.empty()) os << " [" << subject << "]";
  os << ": " << message;
  return os.str();
}

namespace {

std::string cell_subject(const Cell& c)
{
  return c.name + "/" + std::string(to_string(c.variant));
}

void validate_cell(const Cell& c, std::vector<LibraryIssue>& issues)
{
  auto bad = [&](std::string rule) {
    issues.push_back({LibraryIssue::Kind::invariant, cell_subject(c), std::move(rule)});
  };
  if (c.name.empty()) bad("name is non-empty");
  if (c.outputs.empty()) bad("at least one output pin");
  if (c.inputs.size() > static_cast<std::size_t>(kMaxFunctionInputs)) bad("at most 6 input pins");
  {
    std::set<std::string> pins(c.inputs.begin(), c.inputs.end());
    pins.insert(c.outputs.begin(), c.outputs.end());
    if (pins.size() != c.inputs.size() + c.outputs.size()) bad("pin names are unique");
  }
  if (!(c.area_um2 > 0.0)) bad("area_um2 > 0");
  if (!(c.leakage_nw >= 0.0)) bad("leakage_nw >= 0");
  if (!(c.load_coeff_ns_per_ff >= 0.0)) bad("load_coeff_ns_per_ff >= 0");

  if (c.input_cap_ff.size() != c.inputs.size() ||
      !std::all_of(c.inputs.begin(), c.inputs.end(),
                   [&](const std::string& p) { return c.input_cap_ff.count(p) == 1; }))
    bad("input_cap_ff has one entry per input pin");
  for (const auto& [pin, cap] : c.input_cap_ff)
    if (!(cap >= 0.0)) bad("input_cap_ff[" + pin + "] >= 0");

  if (c.intrinsic_delay_ns.size() != c.outputs.size() ||
      !std::all_of(c.outputs.begin(), c.outputs.end(),
                   [&](const std::string& p) { return c.intrinsic_delay_ns.count(p) == 1; }))
    bad("intrinsic_delay_ns has one entry per output pin");
  for (const auto& [pin, d] : c.intrinsic_delay_ns)
    if (!(d > 0.0)) bad("intrinsic_delay_ns[" + pin + "] > 0");

  if (c.functions.size() != c.outputs.size() ||
      !std::all_of(c.outputs.begin(), c.outputs.end(),
                   [&](const std::string& p) { return c.functions.count(p) == 1; }))
    bad("every output pin has exactly one function");
  for (const auto& [pin, expr] : c.functions) {
    try {
      if (c.inputs.size() <= static_cast<std::size_t>(kMaxFunctionInputs))
        compile_expression(expr, c.inputs);
    } catch (const DomainError& e) {
      bad("function for " + pin + " references only declared input pins (" + e.what() + ")");
    }
  }
  if (c.load_measurement) {
    const auto& lm = *c.load_measurement;
    if (!(lm.area_um2 > 0.0)) bad("load_measurement.area_um2 > 0");
    for (const auto& [pin, d] : lm.delay_ns)
      if (c.output_index(pin) < 0) bad("load_measurement.delay_ns[" + pin + "] names an output");
  }
}

} // namespace

std::vector<LibraryIssue> validate_library(const Library& lib)
{
  std::vector<LibraryIssue> issues;
  if (auto rule = check_invariants(lib.technology); !rule.empty())
    issues.push_back({LibraryIssue::Kind::invariant, "technology", rule});
  if (auto rule = check_invariants(lib.ref_point); !rule.empty())
    issues.push_back({LibraryIssue::Kind::invariant, "ref_point", rule});
  if (!(lib.short_circuit_fraction >= 0.0))
    issues.push_back({LibraryIssue::Kind::invariant, "short_circuit_fraction", ">= 0"});
  std::set<std::string> corner_names;
  for (const auto& c : lib.corners) {
    if (auto rule = check_invariants(c); !rule.empty())
      issues.push_back({LibraryIssue::Kind::invariant, "corner " + c.name, rule});
    if (!corner_names.insert(c.name).second)
      issues.push_back({LibraryIssue::Kind::invariant, "corner " + c.name, "corner names are unique"});
  }
  for (const auto& [key, cell] : lib.cells) {
    if (key.name != cell.name || key.variant != cell.variant)
      issues.push_back({LibraryIssue::Kind::invariant, cell_subject(cell), "cell stored under its own key"});
    validate_cell(cell, issues);
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json number_map(const std::map<std::string, double>& m, const std::vector<std::string>& order)
{
  ordered_json j = ordered_json::object();
  for (const auto& pin : order)
    if (auto it = m.find(pin); it != m.end()) j[pin] = it->second;
  for (const auto& [pin, v] : m)
    if (!j.contains(pin)) j[pin] = v;
  return j;
}

ordered_json cell_to_json(const Cell& c)
{
  ordered_json j;
  j["name"] = c.name;
  j["variant"] = std::string(to_string(c.variant));
  j["inputs"] = c.inputs;
  j["outputs"] = c.outputs;
  ordered_json fns = ordered_json::object();
  for (const auto& pin : c.outputs)
    if (auto it = c.functions.find(pin); it != c.functions.end()) fns[pin] = it->second;
  for (const auto& [pin, e] : c.functions)
    if (!fns.contains(pin)) fns[pin] = e;
  j["functions"] = fns;
  j["area_um2"] = c.area_um2;
  j["input_cap_ff"] = number_map(c.input_cap_ff, c.inputs);
  j["intrinsic_delay_ns"] = number_map(c.intrinsic_delay_ns, c.outputs);
  j["load_coeff_ns_per_ff"] = c.load_coeff_ns_per_ff;
  j["leakage_nw"] = c.leakage_nw;
  if (c.ref_dynamic_pw) j["ref_dynamic_pw"] = *c.ref_dynamic_pw;
  if (c.load_measurement) {
    const auto& lm = *c.load_measurement;
    ordered_json m;
    m["area_um2"] = lm.area_um2;
    m["delay_ns"] = number_map(lm.delay_ns, c.outputs);
    m["leakage_nw"] = lm.leakage_nw;
    m["dynamic_pw"] = lm.dynamic_pw;
    j["load_measurement"] = m;
  }
  return j;
}

} // namespace

std::string save_library(const Library& lib)
{
  ordered_json doc;
  const auto& t = lib.technology;
  doc["technology"] = ordered_json{{"node_name", t.node_name},     {"vth0", t.vth0},
                                   {"n_slope", t.n_slope},         {"i0", t.i0},
                                   {"w_over_l", t.w_over_l},       {"eta_dibl", t.eta_dibl},
                                   {"alpha_sat", t.alpha_sat},     {"tox_nm", t.tox_nm},
                                   {"temperature_k", t.temperature_k}};
  doc["ref_point"] = ordered_json{{"vdd", lib.ref_point.vdd},
                                  {"frequency", lib.ref_point.frequency},
                                  {"temperature_k", lib.ref_point.temperature_k}};
  doc["short_circuit_fraction"] = lib.short_circuit_fraction;
  ordered_json corners = ordered_json::array();
  for (const auto& c : lib.corners)
    corners.push_back(ordered_json{{"name", c.name},
                                   {"vth_shift_frac", c.vth_shift_frac},
                                   {"delay_derate", c.delay_derate}});
  doc["corners"] = corners;
  ordered_json cells = ordered_json::array();
  for (const auto& [key, cell] : lib.cells) cells.push_back(cell_to_json(cell));
  doc["cells"] = cells;
  return doc.dump(2) + "\n";
}

namespace {

// Schema reader; records issues instead of throwing so a single load reports
// every problem it can find.
class SchemaReader {
public:
  SchemaReader(std::vector<LibraryIssue>& issues, SchemaMode mode) : issues_(issues), mode_(mode) {}

  bool failed() const { return failed_; }

  void error(const std::string& path, const std::string& msg)
  {
    failed_ = true;
    issues_.push_back({LibraryIssue::Kind::schema, path, msg});
  }

  bool require_object(const json& j, const std::string& path)
  {
    if (j.is_object()) return true;
    error(path, "expected an object");
    return false;
  }

  void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
  {
    for (const auto& [key, value] : obj.items()) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return key == a; });
      if (known) continue;
      if (mode_ == SchemaMode::strict)
        error(join(path, key), "unknown key");
      else
        issues_.push_back({LibraryIssue::Kind::warning, join(path, key), "unknown key ignored"});
    }
  }

  double number(const json& obj, const std::string& path, const char* key,
                 std::optional<double> fallback = std::nullopt)
  {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      error(join(path, key), "missing required number");
      return 0.0;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      error(join(path, key), "expected a number");
      return 0.0;
    }
    return v.get<double>();
  }

  std::string text(const json& obj, const std::string& path, const char* key)
  {
    if (!obj.contains(key)) {
      error(join(path, key), "missing required string");
      return {};
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
      error(join(path, key), "expected a string");
      return {};
    }
    return v.get<std::string>();
  }

  std::vector<std::string> string_list(const json& obj, const std::string& path, const char* key)
  {
    std::vector<std::string> out;
    if (!obj.contains(key) || !obj.at(key).is_array()) {
      error(join(path, key), "expected an array of strings");
      return out;
    }
    for (const auto& v : obj.at(key)) {
      if (!v.is_string()) {
        error(join(path, key), "expected an array of strings");
        return {};
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  std::map<std::string, double> number_map(const json& obj, const std::string& path, const char* key)
  {
    std::map<std::string, double> out;
    if (!obj.contains(key) || !obj.at(key).is_object()) {
      error(join(path, key), "expected an object of numbers");
      return out;
    }
    for (const auto& [k, v] : obj.at(key).items()) {
      if (!v.is_number()) {
        error(join(join(path, key), k), "expected a number");
        continue;
      }
      out[k] = v.get<double>();
    }
    return out;
  }

  std::map<std::string, std::string> string_map(const json& obj, const std::string& path, const char* key)
  {
    std::map<std::string, std::string> out;
    if (!obj.contains(key) || !obj.at(key).is_object()) {
      error(join(path, key), "expected an object of strings");
      return out;
    }
    for (const auto& [k, v] : obj.at(key).items()) {
      if (!v.is_string()) {
        error(join(join(path, key), k), "expected a string");
        continue;
      }
      out[k] = v.get<std::string>();
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key)
  {
    return path.empty() ? key : path + "." + key;
  }

private:
  std::vector<LibraryIssue>& issues_;
  SchemaMode mode_;
  bool failed_ = false;
};

std::pair<int, int> line_column(std::string_view text, std::size_t byte)
{
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

Cell read_cell(SchemaReader& r, const json& j, const std::string& path)
{
  Cell c;
  if (!r.require_object(j, path)) return c;
  r.check_keys(j, path,
               {"name", "variant", "inputs", "outputs", "functions", "area_um2", "input_cap_ff",
                "intrinsic_delay_ns", "load_coeff_ns_per_ff", "leakage_nw", "ref_dynamic_pw",
                "load_measurement"});
  c.name = r.text(j, path, "name");
  const std::string variant = r.text(j, path, "variant");
  if (auto v = parse_variant(variant))
    c.variant = *v;
  else if (!variant.empty())
    r.error(SchemaReader::join(path, "variant"), "expected \"conventional\" or \"stacked\"");
  c.inputs = r.string_list(j, path, "inputs");
  c.outputs = r.string_list(j, path, "outputs");
  c.functions = r.string_map(j, path, "functions");
  c.area_um2 = r.number(j, path, "area_um2");
  c.input_cap_ff = r.number_map(j, path, "input_cap_ff");
  c.intrinsic_delay_ns = r.number_map(j, path, "intrinsic_delay_ns");
  c.load_coeff_ns_per_ff = r.number(j, path, "load_coeff_ns_per_ff");
  c.leakage_nw = r.number(j, path, "leakage_nw");
  if (j.contains("ref_dynamic_pw")) c.ref_dynamic_pw = r.number(j, path, "ref_dynamic_pw");
  if (j.contains("load_measurement")) {
    const std::string lp = SchemaReader::join(path, "load_measurement");
    const json& m = j.at("load_measurement");
    if (r.require_object(m, lp)) {
      r.check_keys(m, lp, {"area_um2", "delay_ns", "leakage_nw", "dynamic_pw"});
      LoadMeasurement lm;
      lm.area_um2 = r.number(m, lp, "area_um2");
      lm.delay_ns = r.number_map(m, lp, "delay_ns");
      lm.leakage_nw = r.number(m, lp, "leakage_nw");
      lm.dynamic_pw = r.number(m, lp, "dynamic_pw");
      c.load_measurement = lm;
    }
  }
  return c;
}

} // namespace

LibraryLoadResult load_library(std::string_view text, SchemaMode mode)
{
  LibraryLoadResult result;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::string msg = e.what();
    if (auto pos = msg.find("; last read"); pos != std::string::npos) msg = msg.substr(pos + 2);
    result.issues.push_back({LibraryIssue::Kind::parse, "", msg, line, column});
    return result;
  }

  SchemaReader r(result.issues, mode);
  if (!r.require_object(doc, "")) return result;
  r.check_keys(doc, "", {"technology", "ref_point", "short_circuit_fraction", "corners", "cells"});

  Library lib;
  lib.corners.clear();
  if (doc.contains("technology") && r.require_object(doc["technology"], "technology")) {
    const json& t = doc["technology"];
    r.check_keys(t, "technology",
                 {"node_name", "vth0", "n_slope", "i0", "w_over_l", "eta_dibl", "alpha_sat",
                  "tox_nm", "temperature_k"});
    auto& m = lib.technology;
    m.node_name = r.text(t, "technology", "node_name");
    m.vth0 = r.number(t, "technology", "vth0");
    m.n_slope = r.number(t, "technology", "n_slope");
    m.i0 = r.number(t, "technology", "i0");
    m.w_over_l = r.number(t, "technology", "w_over_l");
    m.eta_dibl = r.number(t, "technology", "eta_dibl");
    m.alpha_sat = r.number(t, "technology", "alpha_sat");
    m.tox_nm = r.number(t, "technology", "tox_nm");
    m.temperature_k = r.number(t, "technology", "temperature_k");
  } else if (!doc.contains("technology")) {
    r.error("technology", "missing required object");
  }

  if (doc.contains("ref_point") && r.require_object(doc["ref_point"], "ref_point")) {
    const json& p = doc["ref_point"];
    r.check_keys(p, "ref_point", {"vdd", "frequency", "temperature_k"});
    lib.ref_point.vdd = r.number(p, "ref_point", "vdd");
    lib.ref_point.frequency = r.number(p, "ref_point", "frequency");
    lib.ref_point.temperature_k = r.number(p, "ref_point", "temperature_k");
  } else if (!doc.contains("ref_point")) {
    r.error("ref_point", "missing required object");
  }

  lib.short_circuit_fraction = r.number(doc, "", "short_circuit_fraction", 0.10);

  if (!doc.contains("corners")) {
    lib.corners = default_corners();
  } else if (!doc["corners"].is_array()) {
    r.error("corners", "expected an array");
  } else {
    std::size_t i = 0;
    for (const auto& cj : doc["corners"]) {
      const std::string path = "corners[" + std::to_string(i++) + "]";
      if (!r.require_object(cj, path)) continue;
      r.check_keys(cj, path, {"name", "vth_shift_frac", "delay_derate"});
      lib.corners.push_back({r.text(cj, path, "name"), r.number(cj, path, "vth_shift_frac"),
                             r.number(cj, path, "delay_derate")});
    }
  }

  if (!doc.contains("cells") || !doc["cells"].is_array()) {
    r.error("cells", "expected an array");
  } else {
    std::size_t i = 0;
    for (const auto& cj : doc["cells"]) {
      const std::string path = "cells[" + std::to_string(i++) + "]";
      Cell cell = read_cell(r, cj, path);
      CellKey key{cell.name, cell.variant};
      if (lib.cells.count(key)) {
        r.error(path, "duplicate cell " + cell.name + "/" + std::string(to_string(cell.variant)));
        continue;
      }
      lib.cells.emplace(std::move(key), std::move(cell));
    }
  }

  if (r.failed()) return result;

  auto violations = validate_library(lib);
  if (!violations.empty()) {
    result.issues.insert(result.issues.end(), violations.begin(), violations.end());
    return result;
  }
  result.library = std::move(lib);
  return result;
}

// ---------------------------------------------------------------------------
// Derating

double corner_threshold(const Library& lib, const CornerSpec& corner, const DerateOptions& options)
{
  return options.vth0.value_or(lib.technology.vth0) * (1.0 + corner.vth_shift_frac);
}

EffectiveCell derate_cell(const Cell& cell, const Library& lib, const OperatingPoint& op,
                          const CornerSpec& corner, const DerateOptions& options)
{
  const TechnologyModel& nominal = lib.technology;
  const OperatingPoint& ref = lib.ref_point;

  TechnologyModel at_ref = nominal;
  at_ref.temperature_k = ref.temperature_k;
  TechnologyModel at_op = nominal;
  at_op.vth0 = corner_threshold(lib, corner, options);
  at_op.temperature_k = op.temperature_k;

  const double scale =
      delay_scale_factor(nominal.alpha_sat, op.vdd, at_op.vth0, ref.vdd, nominal.vth0) *
      corner.delay_derate;

  EffectiveCell eff;
  eff.delay_ns.reserve(cell.outputs.size());
  for (const auto& pin : cell.outputs) eff.delay_ns.push_back(cell.intrinsic_delay_ns.at(pin) * scale);
  eff.load_coeff_ns_per_ff = cell.load_coeff_ns_per_ff * scale;

  // Leakage follows the device model relative to the reference point, so the
  // stored value is reproduced exactly there.
  const double ref_current = subthreshold_current(at_ref, 0.0, ref.vdd);
  double base_nw = cell.leakage_nw;
  double current = 0.0;
  if (cell.variant == Variant::stacked && options.leakage_source == LeakageSource::model) {
    const Cell* conventional = lib.find(cell.name, Variant::conventional);
    if (!conventional)
      throw DomainError("model leakage for " + cell.name + "/stacked needs the conventional variant");
    base_nw = conventional->leakage_nw;
    current = stack_leakage(at_op, op.vdd, 2).current_a;
  } else {
    current = subthreshold_current(at_op, 0.0, op.vdd);
  }
  eff.leakage_nw = base_nw * (op.vdd / ref.vdd) * (current / ref_current);

  double cap = 0.0;
  for (const auto& pin : cell.inputs) cap += cell.input_cap_ff.at(pin);
  eff.dynamic_energy_fj = cap * op.vdd * op.vdd;
  return eff;
}

} // namespace lowpower
