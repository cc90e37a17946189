// Classical-channel plan around the quantum wavelength, the notch filter that
// protects it, and the coexistence noise injected into the quantum receiver.
#pragma once

#include <iosfwd>
#include <vector>

#include "fsoqkd/qkd_rates.hpp"

namespace fsoqkd {

enum class ChannelRole { Data, Supervisory };

struct Channel {
    int index = 0;  // 1-based
    double wavelength_m = 0.0;
    ChannelRole role = ChannelRole::Data;
};

struct ChannelPlan {
    std::vector<Channel> channels;
    double quantum_wavelength_m = 1550.12e-9;

    double detuning_hz(const Channel& channel) const;
    double min_detuning_hz() const;
    double max_detuning_hz() const;
    /// Enforces the plan invariants; throws with the offending channel.
    void validate() const;
};

struct ChannelPlanGrid {
    int channel_count = 48;
    double grid_spacing_hz = 100e9;
    double min_detuning_hz = 155.5e9;
    double band_low_m = 1530.25e-9;   // shortest allowed wavelength
    double band_high_m = 1618.63e-9;  // longest allowed wavelength; supervisory sits here
    double quantum_wavelength_m = 1550.12e-9;
};

/// Default plan: data channels on a uniform grid anchored so the closest one
/// sits exactly min_detuning above the quantum carrier, a matching guard gap
/// below, and the supervisory channel parked at the long-wavelength band edge.
ChannelPlan build_channel_plan(const ChannelPlanGrid& grid = {});

struct NotchFilter {
    double suppression_db_at_quantum = 132.3;
    double passband_insertion_db = 0.0;
    void validate() const;
};

/// Background count rate the classical load adds at the quantum receiver:
///   rate = eta_det * (P_leak + P_raman) / E_photon
/// with P_leak the aggregate power behind the notch and P_raman = rho * P.
/// Returns the total across detectors; linear in absolute launch power.
double coexistence_noise_rate_hz(const ChannelPlan& plan, double aggregate_power_dbm,
                                 const NotchFilter& filter, const DetectorModel& detector,
                                 double raman_coefficient);

/// Ambient counts for one detector: slope * irradiance + dark rate.
double solar_background_hz(double irradiance_lux, double counts_per_lux, double dark_rate_hz);

/// Budget held fixed; the classical load enters as extra background.
std::vector<KeyRateReport> sweep_classical_power(const LinkParameters& params, double budget_db,
                                                 const ChannelPlan& plan,
                                                 const NotchFilter& filter,
                                                 double raman_coefficient,
                                                 const std::vector<double>& powers_dbm);

/// CSV of (index, wavelength_nm, detuning_ghz, role).
void channel_plan_to_csv(std::ostream& os, const ChannelPlan& plan);

}  // namespace fsoqkd
