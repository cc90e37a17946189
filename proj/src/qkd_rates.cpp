#include "fsoqkd/qkd_rates.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace fsoqkd {

void SourceSpec::validate() const {
    if (symbol_rate_hz <= 0.0) throw std::invalid_argument("symbol rate must be > 0");
    if (mean_photon_number <= 0.0) throw std::invalid_argument("mean photon number must be > 0");
    if (duty_cycle <= 0.0 || duty_cycle > 1.0)
        throw std::invalid_argument("duty cycle must be in (0, 1]");
}

void DetectorModel::validate() const {
    if (efficiency <= 0.0 || efficiency > 1.0)
        throw std::invalid_argument("detector efficiency must be in (0, 1]");
    if (dead_time_s < 0.0) throw std::invalid_argument("dead time must be >= 0");
    if (timestamp_resolution_s <= 0.0)
        throw std::invalid_argument("timestamp resolution must be > 0");
    if (count < 1) throw std::invalid_argument("detector count must be >= 1");
    if (dark_rate_hz.size() != static_cast<std::size_t>(count))
        throw std::invalid_argument("need one dark rate per detector");
    for (double d : dark_rate_hz)
        if (d < 0.0) throw std::invalid_argument("dark rates must be >= 0");
}

void NoiseEnvironment::validate() const {
    for (double b : background_rate_hz)
        if (b < 0.0) throw std::invalid_argument("background rates must be >= 0");
    if (intrinsic_error < 0.0 || intrinsic_error >= 0.5)
        throw std::invalid_argument("intrinsic error must be in [0, 0.5)");
}

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy needs p in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double secure_fraction(double q) {
    if (q < 0.0 || q > 0.5) throw std::invalid_argument("secure_fraction needs q in [0, 0.5]");
    return std::max(0.0, 1.0 - 2.0 * binary_entropy(q));
}

double dead_time_saturation(double incident_rate_hz, double dead_time_s) {
    if (incident_rate_hz < 0.0) throw std::invalid_argument("incident rate must be >= 0");
    if (dead_time_s < 0.0) throw std::invalid_argument("dead time must be >= 0");
    return incident_rate_hz / (1.0 + incident_rate_hz * dead_time_s);
}

DetectionRates detection_rates(const SourceSpec& source, const DetectorModel& detector,
                               const NoiseEnvironment& environment, double budget_db,
                               double system_efficiency) {
    source.validate();
    detector.validate();
    environment.validate();
    if (budget_db < 0.0) throw std::invalid_argument("budget must be >= 0 dB");
    if (system_efficiency <= 0.0) throw std::invalid_argument("system efficiency must be > 0");
    if (environment.background_rate_hz.size() != static_cast<std::size_t>(detector.count))
        throw std::invalid_argument("need one background rate per detector");

    // Matched-basis detected-photon rate ahead of saturation.
    const double sifted_pre =
        source.symbol_rate_hz * source.mean_photon_number * std::pow(10.0, -budget_db / 10.0) *
        detector.efficiency * 0.5 * system_efficiency;
    const double per_detector = sifted_pre / detector.count;

    DetectionRates rates;
    rates.signal_sifted_hz.resize(static_cast<std::size_t>(detector.count));
    rates.background_sifted_hz.resize(static_cast<std::size_t>(detector.count));
    for (int i = 0; i < detector.count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double noise = detector.dark_rate_hz[k] + environment.background_rate_hz[k];
        const double incident = per_detector + noise;
        const double thin =
            incident > 0.0 ? dead_time_saturation(incident, detector.dead_time_s) / incident : 1.0;
        rates.signal_sifted_hz[k] = per_detector * thin;
        rates.background_sifted_hz[k] = 0.5 * noise * thin;
        rates.sifted_signal_hz += rates.signal_sifted_hz[k];
        rates.sifted_background_hz += rates.background_sifted_hz[k];
    }
    rates.sifted_total_hz = rates.sifted_signal_hz + rates.sifted_background_hz;
    return rates;
}

double qber(double signal_rate_hz, double background_rate_hz, double intrinsic_error) {
    if (signal_rate_hz < 0.0 || background_rate_hz < 0.0)
        throw std::invalid_argument("rates must be >= 0");
    if (intrinsic_error < 0.0 || intrinsic_error >= 0.5)
        throw std::invalid_argument("intrinsic error must be in [0, 0.5)");
    const double total = signal_rate_hz + background_rate_hz;
    if (total <= 0.0) throw std::invalid_argument("QBER undefined for zero rate");
    return (intrinsic_error * signal_rate_hz + 0.5 * background_rate_hz) / total;
}

KeyRateReport evaluate(const LinkParameters& params, double budget_db) {
    const DetectionRates rates = detection_rates(params.source, params.detector,
                                                 params.environment, budget_db,
                                                 params.system_efficiency);
    KeyRateReport report;
    report.budget_db = budget_db;
    report.sifted_rate_hz = rates.sifted_total_hz;
    report.qber = qber(rates.sifted_signal_hz, rates.sifted_background_hz,
                       params.environment.intrinsic_error);
    report.secure_rate_hz = report.sifted_rate_hz * secure_fraction(report.qber);
    report.fiber_equiv_km = fiber_equivalent_km(budget_db);
    report.secured_capacity_bps = aes_gcm_secured_capacity_bps(report.secure_rate_hz);
    return report;
}

double fiber_equivalent_km(double budget_db) {
    if (budget_db < 0.0) throw std::invalid_argument("budget must be >= 0 dB");
    return budget_db / 0.277;
}

double aes_gcm_secured_capacity_bps(double skr_bps) {
    if (skr_bps < 0.0) throw std::invalid_argument("secure rate must be >= 0");
    return (skr_bps / 256.0) * 64e9 * 8.0;
}

std::vector<KeyRateReport> sweep_budget(const LinkParameters& params,
                                        const std::vector<double>& budgets_db) {
    if (budgets_db.empty()) throw std::invalid_argument("budget grid is empty");
    std::vector<KeyRateReport> out;
    out.reserve(budgets_db.size());
    for (double b : budgets_db) out.push_back(evaluate(params, b));
    return out;
}

void reports_to_csv(std::ostream& os, const char* axis_name, const std::vector<double>& axis,
                    const std::vector<KeyRateReport>& reports) {
    if (axis.size() != reports.size())
        throw std::invalid_argument("axis and report counts differ");
    os << axis_name << ",sifted_hz,qber,skr_hz,fiber_km,capacity_bps\n";
    char line[192];
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const KeyRateReport& r = reports[i];
        std::snprintf(line, sizeof line, "%.3f,%.3f,%.6f,%.3f,%.3f,%.6e\n", axis[i],
                      r.sifted_rate_hz, r.qber, r.secure_rate_hz, r.fiber_equiv_km,
                      r.secured_capacity_bps);
        os << line;
    }
}

}  // namespace fsoqkd
