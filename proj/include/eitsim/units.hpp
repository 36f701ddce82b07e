#pragma once

#include <numbers>

namespace eitsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;

/// Cycles per second to angular frequency.
constexpr double hz_to_rad(double hz) noexcept { return kTwoPi * hz; }
constexpr double rad_to_hz(double rad_per_s) noexcept { return rad_per_s / kTwoPi; }

}  // namespace eitsim
