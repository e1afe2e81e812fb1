#pragma once

#include <string>
#include <vector>

namespace lowpower {

/// Process corner as a fractional threshold shift plus a multiplicative
/// delay derate. FS/SF are folded into a single net threshold shift.
struct CornerSpec {
  std::string name = "TT";
  double vth_shift_frac = 0.0;
  double delay_derate = 1.0;

  bool operator==(const CornerSpec&) const = default;
};

inline constexpr double kMaxCornerShift = 0.3;

/// TT, FF, SS, FS, SF in that order.
std::vector<CornerSpec> default_corners();

CornerSpec typical_corner();

/// First violated invariant, or empty when valid.
std::string check_invariants(const CornerSpec& corner);

bool is_known_corner_name(const std::string& name);

} // namespace lowpower
