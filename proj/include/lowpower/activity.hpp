#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lowpower/cell_library.hpp"
#include "lowpower/netlist.hpp"

namespace lowpower {

struct NetActivity {
  double p_one = 0.5;        // probability the net is logic 1
  double toggle_rate = 0.5;  // expected transitions per cycle

  bool operator==(const NetActivity&) const = default;
};

using ActivityMap = std::map<std::string, NetActivity>;
using InputProbabilities = std::map<std::string, double>;

inline constexpr double kDefaultInputProbability = 0.5;
inline constexpr int kMaxExhaustiveInputs = 16;

/// Boolean value of `output_pin` for the given input bits (cell input order).
bool evaluate_function(const Cell& cell, std::string_view output_pin, std::span<const bool> input_bits);

/// Signal probabilities under spatial and temporal independence, in
/// topological order; toggle_rate = 2 p (1 - p).
ActivityMap propagate_probabilities(const Netlist& nl, const Library& lib,
                                    const InputProbabilities& input_p);

/// Exact activity by enumerating every primary-input vector (two independent
/// consecutive cycles for the toggle probability). Limited to 16 inputs.
ActivityMap exhaustive_activity(const Netlist& nl, const Library& lib,
                                const InputProbabilities& input_p);

/// Same activity on every net; useful for what-if power numbers.
ActivityMap uniform_activity(const Netlist& nl, double toggle_rate);

struct ActivityFileResult {
  InputProbabilities probabilities;
  std::vector<Diagnostic> diagnostics;
};

/// Parses `prob <net> <p>` lines (`#` comments).
ActivityFileResult parse_activity_file(std::string_view text);

/// Fills unspecified primary inputs with kDefaultInputProbability.
InputProbabilities with_default_inputs(const Netlist& nl, InputProbabilities given);

} // namespace lowpower
