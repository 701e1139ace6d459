#pragma once

#include <numbers>

// Angular quantities are rad/s internally; configuration speaks Hz (omega / 2pi).
namespace ptdimer::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double hz(double f) { return kTwoPi * f; }
constexpr double khz(double f) { return kTwoPi * f * 1e3; }
constexpr double mhz(double f) { return kTwoPi * f * 1e6; }
constexpr double ghz(double f) { return kTwoPi * f * 1e9; }

constexpr double to_hz(double omega) { return omega / kTwoPi; }
constexpr double to_mhz(double omega) { return omega / kTwoPi / 1e6; }

constexpr double ns(double t) { return t * 1e-9; }

}  // namespace ptdimer::units
