#include "lowpower/boolean_expr.hpp"

#include <algorithm>
#include <cctype>

#include "lowpower/errors.hpp"

namespace lowpower {

namespace {

// Recursive-descent evaluator over all minterms at once: every value is a
// 64-bit mask indexed by minterm.
class ExpressionParser {
public:
  ExpressionParser(std::string_view text, std::span<const std::string> pins, bool collect)
      : text_(text), pins_(pins), collect_(collect)
  {
  }

  std::uint64_t parse()
  {
    const std::uint64_t value = ternary();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return value;
  }

  std::vector<std::string> referenced;

private:
  std::uint64_t ternary()
  {
    const std::uint64_t cond = disjunction();
    if (!accept('?')) return cond;
    const std::uint64_t if_true = ternary();
    expect(':');
    const std::uint64_t if_false = ternary();
    return (cond & if_true) | (~cond & if_false);
  }

  std::uint64_t disjunction()
  {
    std::uint64_t v = exclusive();
    while (accept('|')) v |= exclusive();
    return v;
  }

  std::uint64_t exclusive()
  {
    std::uint64_t v = conjunction();
    while (accept('^')) v ^= conjunction();
    return v;
  }

  std::uint64_t conjunction()
  {
    std::uint64_t v = unary();
    while (accept('&')) v &= unary();
    return v;
  }

  std::uint64_t unary()
  {
    if (accept('!') || accept('~')) return ~unary();
    if (accept('(')) {
      const std::uint64_t v = ternary();
      expect(')');
      return v;
    }
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '0' || c == '1') {
      ++pos_;
      return c == '1' ? ~std::uint64_t{0} : 0;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      return pin_mask(std::string(text_.substr(start, pos_ - start)));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::uint64_t pin_mask(const std::string& name)
  {
    if (collect_) {
      if (std::find(referenced.begin(), referenced.end(), name) == referenced.end())
        referenced.push_back(name);
      return 0;
    }
    const auto it = std::find(pins_.begin(), pins_.end(), name);
    if (it == pins_.end()) fail("undeclared pin '" + name + "'");
    const auto index = static_cast<unsigned>(it - pins_.begin());
    std::uint64_t mask = 0;
    for (unsigned m = 0; m < 64; ++m)
      if ((m >> index) & 1u) mask |= std::uint64_t{1} << m;
    return mask;
  }

  void skip_space()
  {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c)
  {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c)
  {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const
  {
    throw DomainError("expression \"" + std::string(text_) + "\" at " + std::to_string(pos_) +
                      ": " + msg);
  }

  std::string_view text_;
  std::span<const std::string> pins_;
  bool collect_;
  std::size_t pos_ = 0;
};

} // namespace

TruthTable compile_expression(std::string_view text, std::span<const std::string> pins)
{
  if (pins.size() > static_cast<std::size_t>(kMaxFunctionInputs))
    throw DomainError("expression: at most 6 inputs supported");
  ExpressionParser parser(text, pins, false);
  std::uint64_t bits = parser.parse();
  const unsigned minterms = 1u << pins.size();
  if (minterms < 64) bits &= (std::uint64_t{1} << minterms) - 1;
  return {bits, static_cast<int>(pins.size())};
}

std::vector<std::string> referenced_pins(std::string_view text)
{
  ExpressionParser parser(text, {}, true);
  parser.parse();
  return parser.referenced;
}

} // namespace lowpower
