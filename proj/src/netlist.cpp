#include "lowpower/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lowpower/errors.hpp"

namespace lowpower {

std::string_view to_string(Diagnostic::Kind kind)
{
  switch (kind) {
  case Diagnostic::Kind::syntax: return "syntax error";
  case Diagnostic::Kind::unknown_cell: return "unknown cell";
  case Diagnostic::Kind::unknown_variant: return "unknown variant";
  case Diagnostic::Kind::arity_mismatch: return "arity mismatch";
  case Diagnostic::Kind::duplicate_instance: return "duplicate instance";
  case Diagnostic::Kind::multiple_drivers: return "multiple drivers";
  case Diagnostic::Kind::undriven_net: return "undriven net";
  case Diagnostic::Kind::combinational_cycle: return "combinational cycle";
  }
  return "diagnostic";
}

std::string Diagnostic::to_string() const
{
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  os << message;
  return os.str();
}

std::vector<std::string> Netlist::nets() const
{
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& n) {
    if (seen.insert(n).second) out.push_back(n);
  };
  for (const auto& n : primary_inputs) add(n);
  for (const auto& inst : instances) {
    for (const auto& n : inst.input_nets) add(n);
    for (const auto& n : inst.output_nets) add(n);
  }
  for (const auto& n : primary_outputs) add(n);
  return out;
}

int Netlist::instance_index(std::string_view id) const
{
  for (std::size_t i = 0; i < instances.size(); ++i)
    if (instances[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<CellSignature> standard_signatures()
{
  return {{"NOT", 1, 1}, {"NAND", 2, 1}, {"FULLADDER", 3, 2}, {"MUX1", 3, 1}};
}

std::vector<CellSignature> signatures_of(const Library& lib)
{
  std::vector<CellSignature> out;
  for (const auto& [key, cell] : lib.cells) {
    if (std::any_of(out.begin(), out.end(), [&](const CellSignature& s) { return s.name == key.name; }))
      continue;
    out.push_back({cell.name, static_cast<int>(cell.inputs.size()), static_cast<int>(cell.outputs.size())});
  }
  return out;
}

namespace {

bool is_identifier(std::string_view s)
{
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<std::string> tokenize(std::string_view line)
{
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

// Source lines of declarations, used to attach line numbers to diagnostics.
struct SourceLines {
  std::vector<int> instance;
  std::map<std::string, int> input;
  std::map<std::string, int> output;
};

std::vector<Diagnostic> structure_diagnostics(const Netlist& nl,
                                              const std::vector<CellSignature>& cells,
                                              const SourceLines* lines)
{
  using Kind = Diagnostic::Kind;
  std::vector<Diagnostic> diags;
  auto inst_line = [&](std::size_t i) {
    return lines && i < lines->instance.size() ? lines->instance[i] : 0;
  };

  std::set<std::string> ids;
  for (std::size_t i = 0; i < nl.instances.size(); ++i) {
    const Instance& inst = nl.instances[i];
    if (!ids.insert(inst.id).second)
      diags.push_back({Kind::duplicate_instance, inst_line(i), "duplicate instance id: " + inst.id});
    const auto sig = std::find_if(cells.begin(), cells.end(),
                                  [&](const CellSignature& s) { return s.name == inst.cell_name; });
    if (sig == cells.end()) {
      diags.push_back({Kind::unknown_cell, inst_line(i),
                       "unknown cell: " + inst.cell_name + " (instance " + inst.id + ")"});
      continue;
    }
    if (static_cast<int>(inst.input_nets.size()) != sig->inputs ||
        static_cast<int>(inst.output_nets.size()) != sig->outputs) {
      std::ostringstream os;
      os << "arity mismatch: " << inst.id << " " << inst.cell_name << " expects " << sig->inputs
         << " -> " << sig->outputs << ", got " << inst.input_nets.size() << " -> "
         << inst.output_nets.size();
      diags.push_back({Kind::arity_mismatch, inst_line(i), os.str()});
    }
  }

  // Drivers: primary inputs and instance outputs.
  std::map<std::string, int> driver_count;
  std::unordered_map<std::string, int> driver_line;
  for (const auto& n : nl.primary_inputs) {
    ++driver_count[n];
    if (lines && lines->input.count(n)) driver_line.try_emplace(n, lines->input.at(n));
  }
  for (std::size_t i = 0; i < nl.instances.size(); ++i)
    for (const auto& n : nl.instances[i].output_nets) {
      if (++driver_count[n] > 1) driver_line[n] = inst_line(i);
      else driver_line.try_emplace(n, inst_line(i));
    }

  const auto all_nets = nl.nets();
  for (const auto& n : all_nets)
    if (driver_count[n] > 1)
      diags.push_back({Kind::multiple_drivers, driver_line[n], "multiple drivers: " + n});

  for (std::size_t i = 0; i < nl.instances.size(); ++i)
    for (const auto& n : nl.instances[i].input_nets)
      if (driver_count[n] == 0)
        diags.push_back({Kind::undriven_net, inst_line(i),
                         "undriven net: " + n + " (input of " + nl.instances[i].id + ")"});
  for (const auto& n : nl.primary_outputs)
    if (driver_count[n] == 0) {
      const int line = lines && lines->output.count(n) ? lines->output.at(n) : 0;
      diags.push_back({Kind::undriven_net, line, "undriven net: " + n + " (primary output)"});
    }
  for (const auto& [n, cap] : nl.net_load_ff)
    if (driver_count[n] == 0)
      diags.push_back({Kind::undriven_net, 0, "undriven net: " + n + " (load declaration)"});

  // Cycle check by Kahn's algorithm over instance dependencies.
  const std::size_t count = nl.instances.size();
  std::unordered_map<std::string, int> driver;
  for (std::size_t i = 0; i < count; ++i)
    for (const auto& n : nl.instances[i].output_nets) driver.try_emplace(n, static_cast<int>(i));
  std::vector<std::vector<int>> fanout(count);
  std::vector<int> indegree(count, 0);
  for (std::size_t j = 0; j < count; ++j)
    for (const auto& n : nl.instances[j].input_nets)
      if (auto it = driver.find(n); it != driver.end()) {
        fanout[it->second].push_back(static_cast<int>(j));
        ++indegree[j];
      }
  std::vector<int> ready;
  for (std::size_t i = 0; i < count; ++i)
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int i = ready.back();
    ready.pop_back();
    ++visited;
    for (int j : fanout[i])
      if (--indegree[j] == 0) ready.push_back(j);
  }
  if (visited != count) {
    std::string members;
    int line = 0;
    for (std::size_t i = 0; i < count; ++i)
      if (indegree[i] > 0) {
        members += " " + nl.instances[i].id;
        if (line == 0) line = inst_line(i);
      }
    diags.push_back({Kind::combinational_cycle, line, "combinational cycle through:" + members});
  }
  return diags;
}

} // namespace

NetlistParseResult parse_netlist(std::string_view text)
{
  return parse_netlist(text, standard_signatures());
}

NetlistParseResult parse_netlist(std::string_view text, const std::vector<CellSignature>& cells)
{
  using Kind = Diagnostic::Kind;
  NetlistParseResult result;
  Netlist nl;
  SourceLines lines;
  auto& diags = result.diagnostics;

  auto check_net = [&](const std::string& net, int line) {
    if (is_identifier(net)) return true;
    diags.push_back({Kind::syntax, line, "invalid net name: '" + net + "'"});
    return false;
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = tokenize(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }

    const std::string& kw = tok[0];
    if (kw == "input" || kw == "output") {
      if (tok.size() < 2) {
        diags.push_back({Kind::syntax, line_no, "'" + kw + "' needs at least one net"});
        continue;
      }
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (!check_net(tok[i], line_no)) continue;
        if (kw == "input") {
          nl.primary_inputs.push_back(tok[i]);
          lines.input.try_emplace(tok[i], line_no);
        } else if (lines.output.count(tok[i])) {
          diags.push_back({Kind::syntax, line_no, "output declared twice: " + tok[i]});
        } else {
          nl.primary_outputs.push_back(tok[i]);
          lines.output.emplace(tok[i], line_no);
        }
      }
    } else if (kw == "load") {
      if (tok.size() != 3) {
        diags.push_back({Kind::syntax, line_no, "expected 'load <net> <capacitance_ff>'"});
        continue;
      }
      if (!check_net(tok[1], line_no)) continue;
      double cap = 0.0;
      const auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), cap);
      if (ec != std::errc{} || ptr != tok[2].data() + tok[2].size() || !(cap >= 0.0)) {
        diags.push_back({Kind::syntax, line_no, "invalid capacitance: '" + tok[2] + "'"});
        continue;
      }
      if (!nl.net_load_ff.emplace(tok[1], cap).second)
        diags.push_back({Kind::syntax, line_no, "load declared twice: " + tok[1]});
    } else if (kw == "gate") {
      const auto arrow = std::find(tok.begin(), tok.end(), "->");
      if (tok.size() < 3 || arrow == tok.end() || arrow - tok.begin() < 3 ||
          std::count(tok.begin(), tok.end(), "->") != 1) {
        diags.push_back(
            {Kind::syntax, line_no, "expected 'gate <id> <CELL>[:stacked] <in...> -> <out...>'"});
        continue;
      }
      Instance inst;
      inst.id = tok[1];
      if (!is_identifier(inst.id)) {
        diags.push_back({Kind::syntax, line_no, "invalid instance id: '" + inst.id + "'"});
        continue;
      }
      std::string cell = tok[2];
      if (auto colon = cell.find(':'); colon != std::string::npos) {
        const auto variant = parse_variant(cell.substr(colon + 1));
        if (!variant) {
          diags.push_back({Kind::unknown_variant, line_no,
                           "unknown variant: '" + cell.substr(colon + 1) + "' (instance " + inst.id + ")"});
          continue;
        }
        inst.variant = *variant;
        cell.resize(colon);
      }
      inst.cell_name = cell;
      bool ok = true;
      for (auto it = tok.begin() + 3; it != arrow; ++it) {
        ok = check_net(*it, line_no) && ok;
        inst.input_nets.push_back(*it);
      }
      for (auto it = arrow + 1; it != tok.end(); ++it) {
        ok = check_net(*it, line_no) && ok;
        inst.output_nets.push_back(*it);
      }
      if (inst.output_nets.empty()) {
        diags.push_back({Kind::syntax, line_no, "gate " + inst.id + " has no outputs"});
        ok = false;
      }
      if (!ok) continue;
      nl.instances.push_back(std::move(inst));
      lines.instance.push_back(line_no);
    } else {
      diags.push_back({Kind::syntax, line_no, "unknown statement '" + kw + "'"});
    }
    if (end == text.size()) break;
  }

  auto structural = structure_diagnostics(nl, cells, &lines);
  diags.insert(diags.end(), structural.begin(), structural.end());
  if (diags.empty()) result.netlist = std::move(nl);
  return result;
}

std::string serialize_netlist(const Netlist& nl)
{
  std::ostringstream os;
  if (!nl.primary_inputs.empty()) {
    os << "input";
    for (const auto& n : nl.primary_inputs) os << ' ' << n;
    os << '\n';
  }
  if (!nl.primary_outputs.empty()) {
    os << "output";
    for (const auto& n : nl.primary_outputs) os << ' ' << n;
    os << '\n';
  }
  for (const auto& [net, cap] : nl.net_load_ff) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, cap);
    os << "load " << net << ' ' << std::string_view(buf, ptr - buf) << '\n';
  }
  for (const auto& inst : nl.instances) {
    os << "gate " << inst.id << ' ' << inst.cell_name;
    if (inst.variant == Variant::stacked) os << ":stacked";
    for (const auto& n : inst.input_nets) os << ' ' << n;
    os << " ->";
    for (const auto& n : inst.output_nets) os << ' ' << n;
    os << '\n';
  }
  return os.str();
}

std::vector<Diagnostic> check_structure(const Netlist& nl, const std::vector<CellSignature>& cells)
{
  return structure_diagnostics(nl, cells, nullptr);
}

std::vector<Diagnostic> validate(const Netlist& nl, const Library& lib)
{
  auto diags = structure_diagnostics(nl, signatures_of(lib), nullptr);
  for (const auto& inst : nl.instances) {
    const bool name_known = std::any_of(lib.cells.begin(), lib.cells.end(),
                                        [&](const auto& kv) { return kv.first.name == inst.cell_name; });
    if (name_known && !lib.find(inst.cell_name, inst.variant))
      diags.push_back({Diagnostic::Kind::unknown_variant, 0,
                       "unknown variant: " + inst.cell_name + "/" +
                           std::string(to_string(inst.variant)) + " (instance " + inst.id + ")"});
  }
  return diags;
}

std::vector<int> topological_order(const Netlist& nl)
{
  const std::size_t count = nl.instances.size();
  std::unordered_map<std::string, int> driver;
  for (std::size_t i = 0; i < count; ++i)
    for (const auto& n : nl.instances[i].output_nets) driver.try_emplace(n, static_cast<int>(i));

  std::vector<std::vector<int>> fanout(count);
  std::vector<int> indegree(count, 0);
  for (std::size_t j = 0; j < count; ++j)
    for (const auto& n : nl.instances[j].input_nets)
      if (auto it = driver.find(n); it != driver.end()) {
        fanout[it->second].push_back(static_cast<int>(j));
        ++indegree[j];
      }

  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < count; ++i)
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  std::vector<int> order;
  order.reserve(count);
  while (!ready.empty()) {
    const int i = ready.top();
    ready.pop();
    order.push_back(i);
    for (int j : fanout[i])
      if (--indegree[j] == 0) ready.push(j);
  }
  if (order.size() != count) throw DomainError("topological_order: netlist has a combinational cycle");
  return order;
}

std::vector<std::string> topological_order_ids(const Netlist& nl)
{
  std::vector<std::string> ids;
  for (int i : topological_order(nl)) ids.push_back(nl.instances[i].id);
  return ids;
}

std::vector<Diagnostic> apply_assignment_text(Netlist& nl, std::string_view text)
{
  using Kind = Diagnostic::Kind;
  std::vector<Diagnostic> diags;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != 3 || tok[0] != "assign") {
      diags.push_back({Kind::syntax, line_no, "expected 'assign <instance_id> <variant>'"});
      continue;
    }
    const int idx = nl.instance_index(tok[1]);
    if (idx < 0) {
      diags.push_back({Kind::syntax, line_no, "unknown instance: " + tok[1]});
      continue;
    }
    const auto variant = parse_variant(tok[2]);
    if (!variant) {
      diags.push_back({Kind::unknown_variant, line_no, "unknown variant: '" + tok[2] + "'"});
      continue;
    }
    nl.instances[idx].variant = *variant;
  }
  return diags;
}

} // namespace lowpower
