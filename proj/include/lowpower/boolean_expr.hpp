#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lowpower {

/// Truth table of a single-output boolean function of up to 6 inputs.
/// Bit m of `bits` is the value on minterm m, where input k contributes
/// bit k of m (input 0 is the least significant).
struct TruthTable {
  std::uint64_t bits = 0;
  int num_inputs = 0;

  bool evaluate(std::uint32_t minterm) const { return (bits >> minterm) & 1u; }
  bool operator==(const TruthTable&) const = default;
};

inline constexpr int kMaxFunctionInputs = 6;

/// Compiles an expression over the named pins.
///
/// Grammar (lowest to highest precedence):
///   expr   := or ( '?' expr ':' expr )?
///   or     := xor ( '|' xor )*
///   xor    := and ( '^' and )*
///   and    := unary ( '&' unary )*
///   unary  := ( '!' | '~' ) unary | '(' expr ')' | pin | '0' | '1'
///
/// Throws DomainError on syntax errors or references to undeclared pins.
TruthTable compile_expression(std::string_view text, std::span<const std::string> pins);

/// Pin names referenced by `text`, in order of first use. Throws on syntax errors.
std::vector<std::string> referenced_pins(std::string_view text);

} // namespace lowpower
