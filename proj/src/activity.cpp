#include "lowpower/activity.hpp"

#include <charconv>
#include <sstream>

#include "lowpower/errors.hpp"

namespace lowpower {

namespace {

NetActivity from_probability(double p)
{
  return {p, 2.0 * p * (1.0 - p)};
}

std::vector<double> primary_probabilities(const Netlist& nl, const InputProbabilities& input_p)
{
  std::vector<double> out;
  out.reserve(nl.primary_inputs.size());
  for (const auto& n : nl.primary_inputs) {
    const auto it = input_p.find(n);
    if (it == input_p.end()) throw DomainError("missing probability for primary input " + n);
    if (!(it->second >= 0.0 && it->second <= 1.0))
      throw DomainError("probability for " + n + " outside [0, 1]");
    out.push_back(it->second);
  }
  return out;
}

} // namespace

bool evaluate_function(const Cell& cell, std::string_view output_pin, std::span<const bool> input_bits)
{
  if (input_bits.size() != cell.inputs.size())
    throw DomainError("evaluate_function: " + cell.name + " expects " +
                      std::to_string(cell.inputs.size()) + " inputs, got " +
                      std::to_string(input_bits.size()));
  const auto it = cell.functions.find(std::string(output_pin));
  if (it == cell.functions.end())
    throw DomainError("evaluate_function: " + cell.name + " has no output " + std::string(output_pin));
  const TruthTable table = compile_expression(it->second, cell.inputs);
  std::uint32_t minterm = 0;
  for (std::size_t k = 0; k < input_bits.size(); ++k)
    if (input_bits[k]) minterm |= 1u << k;
  return table.evaluate(minterm);
}

ActivityMap propagate_probabilities(const Netlist& nl, const Library& lib,
                                    const InputProbabilities& input_p)
{
  const auto pi_p = primary_probabilities(nl, input_p);
  std::map<std::string, double> p;
  for (std::size_t i = 0; i < nl.primary_inputs.size(); ++i) p[nl.primary_inputs[i]] = pi_p[i];

  for (int idx : topological_order(nl)) {
    const Instance& inst = nl.instances[idx];
    const Cell& cell = lib.at(inst.cell_name, inst.variant);
    const auto tables = compile_functions(cell);
    const std::size_t n_in = inst.input_nets.size();
    std::vector<double> in(n_in);
    for (std::size_t k = 0; k < n_in; ++k) in[k] = p.at(inst.input_nets[k]);

    for (std::size_t o = 0; o < inst.output_nets.size(); ++o) {
      double sum = 0.0;
      for (std::uint32_t m = 0; m < (1u << n_in); ++m) {
        if (!tables[o].evaluate(m)) continue;
        double w = 1.0;
        for (std::size_t k = 0; k < n_in; ++k) w *= ((m >> k) & 1u) ? in[k] : 1.0 - in[k];
        sum += w;
      }
      p[inst.output_nets[o]] = sum;
    }
  }

  ActivityMap out;
  for (const auto& [net, prob] : p) out.emplace(net, from_probability(prob));
  return out;
}

ActivityMap exhaustive_activity(const Netlist& nl, const Library& lib,
                                const InputProbabilities& input_p)
{
  const std::size_t n_pi = nl.primary_inputs.size();
  if (n_pi > static_cast<std::size_t>(kMaxExhaustiveInputs))
    throw CapacityError("exhaustive_activity: " + std::to_string(n_pi) +
                        " primary inputs exceed the limit of " + std::to_string(kMaxExhaustiveInputs));
  const auto pi_p = primary_probabilities(nl, input_p);

  // Bit-parallel simulation: word w of a net holds vectors 64w .. 64w+63.
  const std::size_t vectors = std::size_t{1} << n_pi;
  const std::size_t words = (vectors + 63) / 64;
  std::map<std::string, std::vector<std::uint64_t>> value;
  for (std::size_t k = 0; k < n_pi; ++k) {
    auto& bits = value[nl.primary_inputs[k]];
    bits.assign(words, 0);
    for (std::size_t v = 0; v < vectors; ++v)
      if ((v >> k) & 1u) bits[v / 64] |= std::uint64_t{1} << (v % 64);
  }

  for (int idx : topological_order(nl)) {
    const Instance& inst = nl.instances[idx];
    const Cell& cell = lib.at(inst.cell_name, inst.variant);
    const auto tables = compile_functions(cell);
    const std::size_t n_in = inst.input_nets.size();
    std::vector<const std::vector<std::uint64_t>*> in(n_in);
    for (std::size_t k = 0; k < n_in; ++k) in[k] = &value.at(inst.input_nets[k]);
    for (std::size_t o = 0; o < inst.output_nets.size(); ++o) {
      std::vector<std::uint64_t> out(words, 0);
      for (std::uint32_t m = 0; m < (1u << n_in); ++m) {
        if (!tables[o].evaluate(m)) continue;
        for (std::size_t w = 0; w < words; ++w) {
          std::uint64_t match = ~std::uint64_t{0};
          for (std::size_t k = 0; k < n_in; ++k)
            match &= ((m >> k) & 1u) ? (*in[k])[w] : ~(*in[k])[w];
          out[w] |= match;
        }
      }
      value[inst.output_nets[o]] = std::move(out);
    }
  }

  std::vector<double> weight(vectors);
  for (std::size_t v = 0; v < vectors; ++v) {
    double w = 1.0;
    for (std::size_t k = 0; k < n_pi; ++k) w *= ((v >> k) & 1u) ? pi_p[k] : 1.0 - pi_p[k];
    weight[v] = w;
  }

  ActivityMap out;
  for (const auto& [net, bits] : value) {
    double ones = 0.0;
    double zeros = 0.0;
    for (std::size_t v = 0; v < vectors; ++v)
      ((bits[v / 64] >> (v % 64)) & 1u ? ones : zeros) += weight[v];
    // Two independent cycles: P(x1 != x2) = sum over pairs = 2 P1 P0.
    out.emplace(net, NetActivity{ones, 2.0 * ones * zeros});
  }
  return out;
}

ActivityMap uniform_activity(const Netlist& nl, double toggle_rate)
{
  ActivityMap out;
  for (const auto& n : nl.nets()) out[n] = {0.5, toggle_rate};
  return out;
}

ActivityFileResult parse_activity_file(std::string_view text)
{
  ActivityFileResult result;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream is{std::string(line)};
    std::string kw, net, value;
    if (!(is >> kw)) continue;
    std::string extra;
    if (kw != "prob" || !(is >> net >> value) || (is >> extra)) {
      result.diagnostics.push_back({Diagnostic::Kind::syntax, line_no, "expected 'prob <net> <p>'"});
      continue;
    }
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), p);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !(p >= 0.0 && p <= 1.0)) {
      result.diagnostics.push_back(
          {Diagnostic::Kind::syntax, line_no, "probability must be a number in [0, 1]: '" + value + "'"});
      continue;
    }
    result.probabilities[net] = p;
  }
  return result;
}

InputProbabilities with_default_inputs(const Netlist& nl, InputProbabilities given)
{
  for (const auto& n : nl.primary_inputs) given.try_emplace(n, kDefaultInputProbability);
  return given;
}

} // namespace lowpower
