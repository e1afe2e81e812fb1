#include "lowpower/corners.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lowpower {

namespace {
constexpr std::array<const char*, 5> kCornerNames{"TT", "FF", "SS", "FS", "SF"};
}

std::vector<CornerSpec> default_corners()
{
  return {
      {"TT", 0.0, 1.0},
      {"FF", -0.10, 0.9},
      {"SS", 0.10, 1.1},
      {"FS", -0.05, 1.0},
      {"SF", 0.05, 1.0},
  };
}

CornerSpec typical_corner() { return {"TT", 0.0, 1.0}; }

bool is_known_corner_name(const std::string& name)
{
  return std::find(kCornerNames.begin(), kCornerNames.end(), name) != kCornerNames.end();
}

std::string check_invariants(const CornerSpec& c)
{
  if (!is_known_corner_name(c.name)) return "name in {TT, FF, SS, FS, SF}";
  if (c.name == "TT" && (c.vth_shift_frac != 0.0 || c.delay_derate != 1.0))
    return "TT has zero shift and derate 1.0";
  if (!(std::abs(c.vth_shift_frac) <= kMaxCornerShift)) return "|vth_shift_frac| <= 0.3";
  if (!(c.delay_derate > 0.0)) return "delay_derate > 0";
  return {};
}

} // namespace lowpower
