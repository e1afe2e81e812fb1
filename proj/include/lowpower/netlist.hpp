#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lowpower/cell_library.hpp"

namespace lowpower {

struct Instance {
  std::string id;
  std::string cell_name;
  Variant variant = Variant::conventional;
  std::vector<std::string> input_nets;
  std::vector<std::string> output_nets;

  bool operator==(const Instance&) const = default;
};

/// Structural combinational netlist. Construct through parse_netlist or
/// fill the fields directly and check with validate().
struct Netlist {
  std::vector<std::string> primary_inputs;
  std::vector<std::string> primary_outputs;
  std::vector<Instance> instances;
  std::map<std::string, double> net_load_ff;  // extra wire capacitance

  bool operator==(const Netlist&) const = default;

  /// All nets in order of first appearance (inputs, outputs, then instances).
  std::vector<std::string> nets() const;
  int instance_index(std::string_view id) const;
};

struct Diagnostic {
  enum class Kind {
    syntax,
    unknown_cell,
    unknown_variant,
    arity_mismatch,
    duplicate_instance,
    multiple_drivers,
    undriven_net,
    combinational_cycle,
  };
  Kind kind = Kind::syntax;
  int line = 0;  // 0 when not tied to a source line
  std::string message;

  bool operator==(const Diagnostic&) const = default;
  std::string to_string() const;
};

std::string_view to_string(Diagnostic::Kind kind);

/// Pin arity of a cell type, as the parser sees it.
struct CellSignature {
  std::string name;
  int inputs = 0;
  int outputs = 0;
};

/// NOT 1->1, NAND 2->1, FULLADDER 3->2 (S C), MUX1 3->1 (a b sel).
std::vector<CellSignature> standard_signatures();
std::vector<CellSignature> signatures_of(const Library& lib);

struct NetlistParseResult {
  std::optional<Netlist> netlist;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return netlist.has_value(); }
};

/// Parses the line-oriented netlist format:
///   input  <net> [<net> ...]
///   output <net> [<net> ...]
///   load   <net> <capacitance_ff>
///   gate   <id> <CELL>[:stacked] <in...> -> <out...>
/// `#` starts a comment. The netlist is returned only when no diagnostics arise.
NetlistParseResult parse_netlist(std::string_view text);
NetlistParseResult parse_netlist(std::string_view text, const std::vector<CellSignature>& cells);

/// Inverse of parse_netlist for valid netlists.
std::string serialize_netlist(const Netlist& nl);

/// Structural diagnostics (drivers, cycles, arity against `cells`).
std::vector<Diagnostic> check_structure(const Netlist& nl, const std::vector<CellSignature>& cells);

/// Empty iff every netlist invariant holds and every (cell, variant) is in lib.
std::vector<Diagnostic> validate(const Netlist& nl, const Library& lib);

/// Instance indices in dependency order, ties broken by declaration order.
/// Throws DomainError if the netlist has a combinational cycle.
std::vector<int> topological_order(const Netlist& nl);
std::vector<std::string> topological_order_ids(const Netlist& nl);

/// Parses `assign <instance_id> <variant>` lines and rewrites variants.
/// Unknown instances or variants become diagnostics.
std::vector<Diagnostic> apply_assignment_text(Netlist& nl, std::string_view text);

} // namespace lowpower
