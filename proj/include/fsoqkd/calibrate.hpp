// Fits the scenario's free constants against its anchor figures: receiver
// chain efficiency, intrinsic polarization error, per-terminal excess loss,
// Raman coefficient of the classical load, and the solar count slopes.
#pragma once

#include "fsoqkd/scenario.hpp"

namespace fsoqkd {

/// Chain efficiency such that the matched-basis rate at 0 dB budget hits the
/// anchor. Uses a pristine environment (no ambient, no classical load).
double fit_system_efficiency(const LinkScenario& scenario);

/// Intrinsic error such that the full-chain QBER at 0 dB hits the anchor;
/// closed form given a fitted system efficiency.
double fit_intrinsic_error(const LinkScenario& scenario, double system_efficiency);

/// Per-terminal excess loss such that the best coupling-map pair totals the
/// anchor loss; the geometric share comes from a zero-excess map. At least
/// 2 dB per terminal (switch + fiber-array insertion).
double fit_excess_loss_db(const LinkScenario& scenario);

/// Raman coefficient such that the full chain at the scenario budget and the
/// anchor classical power reproduces the anchor QBER.
double fit_raman_coefficient(const LinkScenario& scenario, double system_efficiency,
                             double intrinsic_error);

/// Ambient slopes per detector from the anchor irradiance and counts.
std::vector<double> fit_solar_slopes(const LinkScenario& scenario);

/// All of the above in dependency order; returns a fully populated block.
Calibration calibrate_all(const LinkScenario& scenario);

}  // namespace fsoqkd
