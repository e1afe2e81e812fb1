#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lowpower/boolean_expr.hpp"
#include "lowpower/corners.hpp"
#include "lowpower/device_models.hpp"

namespace lowpower {

enum class Variant { conventional, stacked };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view text);

/// Where a stacked cell's leakage comes from: the stored table value, or the
/// conventional counterpart divided by the device-model stack factor.
enum class LeakageSource { table, model };

std::string_view to_string(LeakageSource s);
std::optional<LeakageSource> parse_leakage_source(std::string_view text);

/// Cell measured under the reference output load (kept as metadata; the
/// cell's own fields carry the unloaded characterization).
struct LoadMeasurement {
  double area_um2 = 0.0;
  std::map<std::string, double> delay_ns;
  double leakage_nw = 0.0;
  double dynamic_pw = 0.0;

  bool operator==(const LoadMeasurement&) const = default;
};

struct Cell {
  std::string name;
  Variant variant = Variant::conventional;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> functions;  // output pin -> expression
  double area_um2 = 0.0;
  std::map<std::string, double> input_cap_ff;
  std::map<std::string, double> intrinsic_delay_ns;  // output pin -> 50% delay
  double load_coeff_ns_per_ff = 0.0;
  double leakage_nw = 0.0;
  std::optional<double> ref_dynamic_pw;
  std::optional<LoadMeasurement> load_measurement;

  bool operator==(const Cell&) const = default;

  int input_index(std::string_view pin) const;
  int output_index(std::string_view pin) const;
};

struct CellKey {
  std::string name;
  Variant variant = Variant::conventional;

  auto operator<=>(const CellKey&) const = default;
};

struct Library {
  TechnologyModel technology;
  OperatingPoint ref_point;
  double short_circuit_fraction = 0.10;
  std::vector<CornerSpec> corners = default_corners();
  std::map<CellKey, Cell> cells;

  bool operator==(const Library&) const = default;

  const Cell* find(std::string_view name, Variant variant) const;
  const Cell& at(std::string_view name, Variant variant) const;  // throws DomainError
  const CornerSpec& corner(std::string_view name) const;         // throws DomainError
};

/// Output pin functions compiled to truth tables, in `cell.outputs` order.
std::vector<TruthTable> compile_functions(const Cell& cell);

/// The four-cell reference library, conventional and stacked variants.
Library builtin_reference_library();

struct LibraryIssue {
  enum class Kind { parse, schema, invariant, warning };
  Kind kind = Kind::schema;
  std::string subject;  // field path, or cell "NAME/variant"
  std::string message;
  int line = 0;         // parse errors only
  int column = 0;

  std::string to_string() const;
};

struct LibraryLoadResult {
  std::optional<Library> library;
  std::vector<LibraryIssue> issues;  // errors when library is empty, warnings otherwise

  bool ok() const { return library.has_value(); }
};

enum class SchemaMode { strict, lenient };

LibraryLoadResult load_library(std::string_view text, SchemaMode mode = SchemaMode::strict);

/// Deterministic JSON document; load_library(save_library(lib)) == lib.
std::string save_library(const Library& lib);

/// Invariant violations of an in-memory library (empty when valid).
std::vector<LibraryIssue> validate_library(const Library& lib);

/// Cell characterization moved to an operating point and corner.
struct EffectiveCell {
  std::vector<double> delay_ns;   // per output pin, unloaded
  double load_coeff_ns_per_ff = 0.0;
  double leakage_nw = 0.0;
  double dynamic_energy_fj = 0.0; // sum of input caps times vdd^2
};

struct DerateOptions {
  std::optional<double> vth0;     // replaces the library's nominal threshold
  LeakageSource leakage_source = LeakageSource::table;
};

/// Threshold the devices see at `corner`, before any DIBL.
double corner_threshold(const Library& lib, const CornerSpec& corner,
                        const DerateOptions& options = {});

EffectiveCell derate_cell(const Cell& cell, const Library& lib, const OperatingPoint& op,
                          const CornerSpec& corner, const DerateOptions& options = {});

} // namespace lowpower
