// Analytic BB84 link model: detection rates with dead-time saturation, QBER
// composition, asymptotic secure fraction, and the derived conversions.
#pragma once

#include <iosfwd>
#include <vector>

namespace fsoqkd {

struct SourceSpec {
    double symbol_rate_hz = 1e9;
    double mean_photon_number = 0.1;  // photons per weak-coherent symbol
    double duty_cycle = 0.5;          // pulse-carving fraction of the symbol
    void validate() const;
};

struct DetectorModel {
    double efficiency = 0.10;
    double dead_time_s = 25e-6;
    std::vector<double> dark_rate_hz = {559.0, 599.0};  // one entry per detector
    double timestamp_resolution_s = 82.3e-12;
    int count = 2;
    void validate() const;
};

struct NoiseEnvironment {
    // Ambient counts per detector (solar + coexistence), additive to dark.
    std::vector<double> background_rate_hz = {0.0, 0.0};
    // Baseline polarization error probability of the analyzer chain.
    double intrinsic_error = 0.0;
    void validate() const;
};

/// Everything evaluate() needs for one operating point except the budget.
/// `system_efficiency` is the calibrated constant absorbing the unmodeled
/// receiver chain; it scales the photon survival probability.
struct LinkParameters {
    SourceSpec source;
    DetectorModel detector;
    NoiseEnvironment environment;
    double system_efficiency = 1.0;
};

struct KeyRateReport {
    double budget_db = 0.0;
    double sifted_rate_hz = 0.0;   // matched-basis rate, signal + background
    double qber = 0.0;
    double secure_rate_hz = 0.0;
    double fiber_equiv_km = 0.0;
    double secured_capacity_bps = 0.0;
};

/// h2(p) = -p log2 p - (1-p) log2 (1-p), with h2(0) = h2(1) = 0.
double binary_entropy(double p);

/// Asymptotic BB84 secure fraction max(0, 1 - 2 h2(q)); zero from ~11% QBER.
double secure_fraction(double q);

/// Non-paralyzable detector: R_out = R_in / (1 + R_in * dead_time).
double dead_time_saturation(double incident_rate_hz, double dead_time_s);

struct DetectionRates {
    std::vector<double> signal_sifted_hz;      // per detector, post-saturation
    std::vector<double> background_sifted_hz;  // per detector, post-saturation
    double sifted_signal_hz = 0.0;
    double sifted_background_hz = 0.0;
    double sifted_total_hz = 0.0;
};

/// Detection chain for one optical budget. The matched-basis photon rate
///   symbol_rate * mu * 10^(-budget/10) * detector_efficiency * 1/2 * system_efficiency
/// is split evenly across the physical detectors; each detector's incident
/// stream (signal + dark + background) is thinned by dead-time saturation.
/// Background entering the sifted stream keeps a further 1/2 basis-match
/// factor, mirroring what offline sifting does to random counts.
DetectionRates detection_rates(const SourceSpec& source, const DetectorModel& detector,
                               const NoiseEnvironment& environment, double budget_db,
                               double system_efficiency);

/// Q = (e_int * S + B/2) / (S + B) for signal rate S and background rate B in
/// the sifted stream. Throws when S + B == 0.
double qber(double signal_rate_hz, double background_rate_hz, double intrinsic_error);

/// Full chain: detection rates -> QBER -> secure fraction -> conversions.
KeyRateReport evaluate(const LinkParameters& params, double budget_db);

/// Budget in dB over end-of-life fiber at 0.277 dB/km.
double fiber_equivalent_km(double budget_db);

/// Classical capacity securable at one 256-bit key per 64 GB of data.
double aes_gcm_secured_capacity_bps(double skr_bps);

std::vector<KeyRateReport> sweep_budget(const LinkParameters& params,
                                        const std::vector<double>& budgets_db);

/// CSV with header (budget_db|p_cla_dbm, sifted_hz, qber, skr_hz, fiber_km,
/// capacity_bps). `axis` holds the first-column values.
void reports_to_csv(std::ostream& os, const char* axis_name, const std::vector<double>& axis,
                    const std::vector<KeyRateReport>& reports);

}  // namespace fsoqkd
