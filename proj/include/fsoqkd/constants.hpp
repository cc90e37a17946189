#pragma once

namespace fsoqkd::constants {

inline constexpr double speed_of_light_mps = 299792458.0;
inline constexpr double planck_js = 6.62607015e-34;

// 10 / ln(10): converts a power-attenuation exponent in nepers to dB.
inline constexpr double db_per_neper = 4.342944819032518;

}  // namespace fsoqkd::constants
