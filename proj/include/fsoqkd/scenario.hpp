// Scenario files: a sectioned key-value format describing one experiment
// (terminals, link, source, detectors, noise, channel plan, sounding setup,
// calibration anchors and fitted constants).
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsoqkd/beam_optics.hpp"
#include "fsoqkd/coexistence.hpp"
#include "fsoqkd/qkd_rates.hpp"
#include "fsoqkd/sounding.hpp"

namespace fsoqkd {

/// Configuration problem with file/line context. Exit code 2 at the CLI.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    ConfigError(const std::filesystem::path& file, int line, const std::string& what)
        : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what) {}
};

/// Reference figures a calibration run fits against; normally the values
/// measured on the bench this scenario mirrors.
struct Anchors {
    double sifted_0db_hz = 54.3e3;
    double qber_0db = 0.0207;
    double best_pair_loss_db = 15.5;
    double coexist_power_dbm = 11.2;
    double coexist_qber = 0.103;
    double coexist_budget_db = 15.5;     // bridge loss of the coexistence bench
    double coexist_ambient_lux = 800.0;  // lab light during that measurement
    double solar_irradiance_lux = 61e3;
    std::vector<double> solar_counts_hz = {1204.0, 980.0};
};

/// Fitted constants. Analysis commands require the fields they use and
/// refuse to run when they are missing; `calibrate` fills them in.
struct Calibration {
    std::optional<double> system_efficiency;
    std::optional<double> intrinsic_error;
    std::optional<double> excess_loss_db;  // per terminal
    std::optional<double> raman_coefficient;
    std::optional<std::vector<double>> solar_slopes_hz_per_lux;  // per detector
};

struct LinkSettings {
    double distance_m = 6.0;
    double wavelength_m = 1550.12e-9;
    // Channel loss used by budget-independent commands (power sweeps, Monte
    // Carlo). Empty means "use the best pair of the simulated coupling map".
    std::optional<double> budget_db;
};

struct PoseSettings {
    Eigen::Vector2d boresight_error_rad = Eigen::Vector2d::Zero();
};

struct EnvironmentSettings {
    double irradiance_lux = 0.0;
    bool classical_load = false;
    double aggregate_power_dbm = 0.0;
};

struct LinkScenario {
    HexLattice lattice;
    CollimatorSpec collimator;
    LinkSettings link;
    PoseSettings tx_pose;
    PoseSettings rx_pose;
    int tx_switch_count = 31;
    SourceSpec source;
    DetectorModel detector;
    EnvironmentSettings environment;
    NotchFilter notch;
    SoundingConfig sounding;
    Anchors anchors;
    Calibration calibration;
    std::uint64_t seed = 1;

    /// Terminal descriptions with the calibrated excess loss applied.
    Terminal tx_terminal() const;
    Terminal rx_terminal() const;

    /// Ambient background per detector (solar only; the classical load is
    /// applied by power sweeps on top of this).
    std::vector<double> ambient_background_hz() const;

    /// Analytic-model inputs; requires system efficiency and intrinsic error,
    /// plus solar slopes when the scenario has ambient light and the Raman
    /// coefficient when the classical load is on.
    LinkParameters link_parameters() const;

    /// Coupling map over the configured switch subsets.
    CouplingMap coupling_map() const;

    /// Channel loss for budget-independent commands.
    double resolved_budget_db() const;

    double classical_noise_rate_hz() const;  // total added by the classical load
};

LinkScenario load_scenario(const std::filesystem::path& file);
void save_scenario(const std::filesystem::path& file, const LinkScenario& scenario);
std::string scenario_to_text(const LinkScenario& scenario);

}  // namespace fsoqkd
