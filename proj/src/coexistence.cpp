#include "fsoqkd/coexistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fsoqkd/constants.hpp"

namespace fsoqkd {

namespace {

double frequency_hz(double wavelength_m) { return constants::speed_of_light_mps / wavelength_m; }

}  // namespace

double ChannelPlan::detuning_hz(const Channel& channel) const {
    return std::abs(frequency_hz(channel.wavelength_m) - frequency_hz(quantum_wavelength_m));
}

double ChannelPlan::min_detuning_hz() const {
    double best = std::numeric_limits<double>::infinity();
    for (const Channel& c : channels) best = std::min(best, detuning_hz(c));
    return best;
}

double ChannelPlan::max_detuning_hz() const {
    double best = 0.0;
    for (const Channel& c : channels) best = std::max(best, detuning_hz(c));
    return best;
}

void ChannelPlan::validate() const {
    if (channels.size() != 48)
        throw std::invalid_argument("channel plan must hold exactly 48 channels, got " +
                                    std::to_string(channels.size()));
    int supervisory = 0;
    // Band bound checks get one part-per-billion of slack so channels placed
    // exactly on an edge survive the round trip through decimal text.
    const double slack = 1e-9;
    const double low = 1530.25e-9 * (1.0 - slack);
    const double high = 1618.63e-9 * (1.0 + slack);
    for (const Channel& c : channels) {
        if (c.wavelength_m < low || c.wavelength_m > high)
            throw std::invalid_argument("channel " + std::to_string(c.index) +
                                        " outside the 1530.25-1618.63 nm band");
        if (c.role == ChannelRole::Supervisory) ++supervisory;
        if (detuning_hz(c) < 155.5e9 * (1.0 - 1e-12))
            throw std::invalid_argument("channel " + std::to_string(c.index) +
                                        " closer than 155.5 GHz to the quantum carrier");
    }
    if (supervisory != 1)
        throw std::invalid_argument("channel plan needs exactly 1 supervisory channel, got " +
                                    std::to_string(supervisory));
}

ChannelPlan build_channel_plan(const ChannelPlanGrid& grid) {
    if (grid.channel_count < 2) throw std::invalid_argument("plan needs at least 2 channels");
    if (grid.grid_spacing_hz <= 0.0) throw std::invalid_argument("grid spacing must be > 0");

    ChannelPlan plan;
    plan.quantum_wavelength_m = grid.quantum_wavelength_m;
    const double f_q = frequency_hz(grid.quantum_wavelength_m);
    const double f_high = frequency_hz(grid.band_low_m);

    const int data_count = grid.channel_count - 1;
    // Channels above the quantum carrier start exactly min_detuning away and
    // climb the grid until the short-wavelength band edge.
    std::vector<double> freqs;
    for (double f = f_q + grid.min_detuning_hz; f <= f_high && static_cast<int>(freqs.size()) < data_count;
         f += grid.grid_spacing_hz)
        freqs.push_back(f);
    // Below the carrier the grid phase continues; slots inside the guard gap
    // (closer than min_detuning) are skipped.
    const double steps = std::ceil(2.0 * grid.min_detuning_hz / grid.grid_spacing_hz - 1e-12);
    for (double f = f_q + grid.min_detuning_hz - steps * grid.grid_spacing_hz;
         static_cast<int>(freqs.size()) < data_count; f -= grid.grid_spacing_hz)
        freqs.push_back(f);

    std::sort(freqs.rbegin(), freqs.rend());  // descending frequency = ascending wavelength
    for (int i = 0; i < data_count; ++i)
        plan.channels.push_back(
            Channel{i + 1, constants::speed_of_light_mps / freqs[static_cast<std::size_t>(i)],
                    ChannelRole::Data});
    plan.channels.push_back(Channel{grid.channel_count, grid.band_high_m, ChannelRole::Supervisory});
    plan.validate();
    return plan;
}

void NotchFilter::validate() const {
    if (suppression_db_at_quantum < 0.0)
        throw std::invalid_argument("notch suppression must be >= 0 dB");
    if (passband_insertion_db < 0.0)
        throw std::invalid_argument("passband insertion loss must be >= 0 dB");
}

double coexistence_noise_rate_hz(const ChannelPlan& plan, double aggregate_power_dbm,
                                 const NotchFilter& filter, const DetectorModel& detector,
                                 double raman_coefficient) {
    plan.validate();
    filter.validate();
    detector.validate();
    if (raman_coefficient < 0.0) throw std::invalid_argument("Raman coefficient must be >= 0");
    if (!std::isfinite(aggregate_power_dbm))
        throw std::invalid_argument("classical power must be finite");

    const double total_w = 1e-3 * std::pow(10.0, aggregate_power_dbm / 10.0);
    const double leak_w = total_w * std::pow(10.0, -filter.suppression_db_at_quantum / 10.0);
    const double raman_w = raman_coefficient * total_w;
    const double photon_energy_j = constants::planck_js * constants::speed_of_light_mps /
                                   plan.quantum_wavelength_m;
    return detector.efficiency * (leak_w + raman_w) / photon_energy_j;
}

double solar_background_hz(double irradiance_lux, double counts_per_lux, double dark_rate_hz) {
    if (irradiance_lux < 0.0) throw std::invalid_argument("irradiance must be >= 0");
    if (counts_per_lux < 0.0) throw std::invalid_argument("solar slope must be >= 0");
    return counts_per_lux * irradiance_lux + dark_rate_hz;
}

std::vector<KeyRateReport> sweep_classical_power(const LinkParameters& params, double budget_db,
                                                 const ChannelPlan& plan,
                                                 const NotchFilter& filter,
                                                 double raman_coefficient,
                                                 const std::vector<double>& powers_dbm) {
    if (powers_dbm.empty()) throw std::invalid_argument("power grid is empty");
    std::vector<KeyRateReport> out;
    out.reserve(powers_dbm.size());
    for (double p_dbm : powers_dbm) {
        LinkParameters loaded = params;
        const double added =
            coexistence_noise_rate_hz(plan, p_dbm, filter, params.detector, raman_coefficient) /
            params.detector.count;
        for (double& b : loaded.environment.background_rate_hz) b += added;
        out.push_back(evaluate(loaded, budget_db));
    }
    return out;
}

void channel_plan_to_csv(std::ostream& os, const ChannelPlan& plan) {
    os << "index,wavelength_nm,detuning_ghz,role\n";
    char line[96];
    for (const Channel& c : plan.channels) {
        std::snprintf(line, sizeof line, "%d,%.4f,%.3f,%s\n", c.index, c.wavelength_m * 1e9,
                      plan.detuning_hz(c) * 1e-9,
                      c.role == ChannelRole::Data ? "data" : "supervisory");
        os << line;
    }
}

}  // namespace fsoqkd
