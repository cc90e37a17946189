#include "fsoqkd/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fsoqkd {

namespace {

// ---------------------------------------------------------------------------
// Sectioned key-value parsing
// ---------------------------------------------------------------------------

struct Entry {
    std::string value;
    int line;
    mutable bool used = false;
};

struct ParsedFile {
    std::filesystem::path path;
    std::map<std::string, std::map<std::string, Entry>> sections;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

ParsedFile parse_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open scenario file: " + file.string());
    ParsedFile parsed;
    parsed.path = file;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError(file, line_no, "malformed section header: " + text);
            section = trim(text.substr(1, text.size() - 2));
            if (section.empty()) throw ConfigError(file, line_no, "empty section name");
            parsed.sections.try_emplace(section);
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(file, line_no, "expected key = value, got: " + text);
        if (section.empty())
            throw ConfigError(file, line_no, "key outside of any [section]");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError(file, line_no, "empty key");
        auto [it, inserted] = parsed.sections[section].emplace(key, Entry{value, line_no});
        if (!inserted)
            throw ConfigError(file, line_no,
                              "duplicate key '" + key + "' in [" + section + "]");
    }
    return parsed;
}

class Reader {
public:
    explicit Reader(const ParsedFile& file) : file_(file) {}

    bool has(const std::string& section, const std::string& key) const {
        const auto s = file_.sections.find(section);
        if (s == file_.sections.end()) return false;
        return s->second.find(key) != s->second.end();
    }

    const Entry& entry(const std::string& section, const std::string& key) const {
        const auto s = file_.sections.find(section);
        if (s == file_.sections.end())
            throw ConfigError("missing [" + section + "] in " + file_.path.string());
        const auto k = s->second.find(key);
        if (k == s->second.end())
            throw ConfigError("missing key '" + key + "' in [" + section + "] of " +
                              file_.path.string());
        k->second.used = true;
        return k->second;
    }

    double number(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(file_.path, e.line, "expected a number for '" + key + "', got '" +
                                                      e.value + "'");
        }
    }

    double number_or(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? number(section, key) : fallback;
    }

    std::optional<double> optional_number(const std::string& section,
                                          const std::string& key) const {
        if (!has(section, key)) return std::nullopt;
        return number(section, key);
    }

    std::uint64_t unsigned_integer(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        std::uint64_t v = 0;
        const auto* begin = e.value.data();
        const auto* end = begin + e.value.size();
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || ptr != end)
            throw ConfigError(file_.path, e.line,
                              "expected a non-negative integer for '" + key + "', got '" +
                                  e.value + "'");
        return v;
    }

    bool boolean(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        if (e.value == "true") return true;
        if (e.value == "false") return false;
        throw ConfigError(file_.path, e.line,
                          "expected true/false for '" + key + "', got '" + e.value + "'");
    }

    std::vector<double> number_list(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        std::vector<double> out;
        std::stringstream ss(e.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(item, &pos));
                if (pos != item.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ConfigError(file_.path, e.line,
                                  "expected a comma-separated number list for '" + key + "'");
            }
        }
        if (out.empty())
            throw ConfigError(file_.path, e.line, "empty list for '" + key + "'");
        return out;
    }

    /// Misspelled or unexpected content is rejected rather than ignored.
    void reject_unknown(const std::map<std::string, std::set<std::string>>& schema) const {
        for (const auto& [section, keys] : file_.sections) {
            const auto s = schema.find(section);
            if (s == schema.end())
                throw ConfigError("unknown section [" + section + "] in " + file_.path.string());
            for (const auto& [key, e] : keys)
                if (s->second.find(key) == s->second.end())
                    throw ConfigError(file_.path, e.line,
                                      "unknown key '" + key + "' in [" + section + "]");
        }
    }

private:
    const ParsedFile& file_;
};

const std::map<std::string, std::set<std::string>>& scenario_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"lattice", {"pitch_um", "rings", "mfd_um"}},
        {"collimator", {"focal_length_mm", "aperture_diameter_mm"}},
        {"link", {"distance_m", "wavelength_nm", "budget_db"}},
        {"tx", {"boresight_x_urad", "boresight_y_urad", "switch_elements"}},
        {"rx", {"boresight_x_urad", "boresight_y_urad"}},
        {"source", {"symbol_rate_hz", "mean_photon_number", "duty_cycle"}},
        {"detector",
         {"efficiency", "dead_time_us", "dark_rates_hz", "timestamp_resolution_ps", "count"}},
        {"environment", {"irradiance_lux", "classical_load", "aggregate_power_dbm"}},
        {"notch", {"suppression_db", "passband_insertion_db"}},
        {"sounding",
         {"dwell_time_ms", "power_meter_noise_db", "resound_period_s", "fade_trigger_db",
          "margin_db", "budget_threshold_db"}},
        {"anchors",
         {"sifted_0db_hz", "qber_0db", "best_pair_loss_db", "coexist_power_dbm", "coexist_qber",
          "coexist_budget_db", "coexist_ambient_lux", "solar_irradiance_lux",
          "solar_counts_hz"}},
        {"calibration",
         {"system_efficiency", "intrinsic_error", "excess_loss_db", "raman_coefficient",
          "solar_slopes_hz_per_lux"}},
        {"seed", {"value"}},
    };
    return schema;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "0";
    return std::string(buf, ptr);
}

// For quantities that undergo a unit conversion on load: 12 significant
// digits swallow the conversion's rounding noise, so saving reproduces the
// human-entered figure and save/load/save is a fixed point.
std::string format_units(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string format_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// LinkScenario
// ---------------------------------------------------------------------------

Terminal LinkScenario::tx_terminal() const {
    if (!calibration.excess_loss_db)
        throw ConfigError("calibration value 'excess_loss_db' missing; run calibrate first");
    Terminal t;
    t.lattice = lattice;
    t.collimator = collimator;
    t.pose.position_m = Eigen::Vector3d::Zero();
    t.pose.boresight_error_rad = tx_pose.boresight_error_rad;
    t.pose.excess_loss_db = *calibration.excess_loss_db;
    t.switch_ids = central_element_ids(lattice, tx_switch_count);
    return t;
}

Terminal LinkScenario::rx_terminal() const {
    if (!calibration.excess_loss_db)
        throw ConfigError("calibration value 'excess_loss_db' missing; run calibrate first");
    Terminal t;
    t.lattice = lattice;
    t.collimator = collimator;
    t.pose.position_m = Eigen::Vector3d(0.0, 0.0, link.distance_m);
    t.pose.boresight_error_rad = rx_pose.boresight_error_rad;
    t.pose.excess_loss_db = *calibration.excess_loss_db;
    const auto elements = all_elements(lattice);
    t.switch_ids.reserve(elements.size());
    for (const auto& e : elements) t.switch_ids.push_back(e.id);
    return t;
}

std::vector<double> LinkScenario::ambient_background_hz() const {
    std::vector<double> bg(static_cast<std::size_t>(detector.count), 0.0);
    if (environment.irradiance_lux > 0.0) {
        if (!calibration.solar_slopes_hz_per_lux)
            throw ConfigError(
                "calibration value 'solar_slopes_hz_per_lux' missing; run calibrate first");
        const auto& slopes = *calibration.solar_slopes_hz_per_lux;
        if (slopes.size() != bg.size())
            throw ConfigError("need one solar slope per detector");
        for (std::size_t i = 0; i < bg.size(); ++i)
            bg[i] = slopes[i] * environment.irradiance_lux;
    }
    return bg;
}

double LinkScenario::classical_noise_rate_hz() const {
    if (!environment.classical_load) return 0.0;
    if (!calibration.raman_coefficient)
        throw ConfigError("calibration value 'raman_coefficient' missing; run calibrate first");
    return coexistence_noise_rate_hz(build_channel_plan(), environment.aggregate_power_dbm, notch,
                                     detector, *calibration.raman_coefficient);
}

LinkParameters LinkScenario::link_parameters() const {
    if (!calibration.system_efficiency)
        throw ConfigError("calibration value 'system_efficiency' missing; run calibrate first");
    if (!calibration.intrinsic_error)
        throw ConfigError("calibration value 'intrinsic_error' missing; run calibrate first");
    LinkParameters params;
    params.source = source;
    params.detector = detector;
    params.environment.background_rate_hz = ambient_background_hz();
    const double classical_per_detector = classical_noise_rate_hz() / detector.count;
    for (double& b : params.environment.background_rate_hz) b += classical_per_detector;
    params.environment.intrinsic_error = *calibration.intrinsic_error;
    params.system_efficiency = *calibration.system_efficiency;
    return params;
}

CouplingMap LinkScenario::coupling_map() const {
    const Terminal tx = tx_terminal();
    const Terminal rx = rx_terminal();
    return simulate_coupling_map(tx, rx, tx.switch_ids, rx.switch_ids, link.distance_m,
                                 link.wavelength_m);
}

double LinkScenario::resolved_budget_db() const {
    if (link.budget_db) return *link.budget_db;
    return coupling_map().best().loss_db;
}

LinkScenario load_scenario(const std::filesystem::path& file) {
    const ParsedFile parsed = parse_file(file);
    const Reader r(parsed);
    r.reject_unknown(scenario_schema());

    LinkScenario s;
    s.lattice.pitch_m = r.number("lattice", "pitch_um") * 1e-6;
    s.lattice.rings = static_cast<int>(r.unsigned_integer("lattice", "rings"));
    s.lattice.mode_field_diameter_m = r.number("lattice", "mfd_um") * 1e-6;
    s.lattice.validate();

    s.collimator.focal_length_m = r.number("collimator", "focal_length_mm") * 1e-3;
    s.collimator.aperture_diameter_m =
        r.number_or("collimator", "aperture_diameter_mm", 50.8) * 1e-3;
    s.collimator.validate();

    s.link.distance_m = r.number("link", "distance_m");
    if (s.link.distance_m <= 0.0) throw ConfigError("link distance must be > 0");
    s.link.wavelength_m = r.number("link", "wavelength_nm") * 1e-9;
    s.link.budget_db = r.optional_number("link", "budget_db");

    s.tx_pose.boresight_error_rad =
        Eigen::Vector2d(r.number_or("tx", "boresight_x_urad", 0.0),
                        r.number_or("tx", "boresight_y_urad", 0.0)) *
        1e-6;
    s.tx_switch_count = static_cast<int>(r.has("tx", "switch_elements")
                                             ? r.unsigned_integer("tx", "switch_elements")
                                             : 31);
    s.rx_pose.boresight_error_rad =
        Eigen::Vector2d(r.number_or("rx", "boresight_x_urad", 0.0),
                        r.number_or("rx", "boresight_y_urad", 0.0)) *
        1e-6;

    s.source.symbol_rate_hz = r.number("source", "symbol_rate_hz");
    s.source.mean_photon_number = r.number("source", "mean_photon_number");
    s.source.duty_cycle = r.number_or("source", "duty_cycle", 0.5);
    s.source.validate();

    s.detector.efficiency = r.number("detector", "efficiency");
    s.detector.dead_time_s = r.number("detector", "dead_time_us") * 1e-6;
    s.detector.dark_rate_hz = r.number_list("detector", "dark_rates_hz");
    s.detector.timestamp_resolution_s = r.number("detector", "timestamp_resolution_ps") * 1e-12;
    s.detector.count = static_cast<int>(r.unsigned_integer("detector", "count"));
    s.detector.validate();

    s.environment.irradiance_lux = r.number_or("environment", "irradiance_lux", 0.0);
    s.environment.classical_load =
        r.has("environment", "classical_load") ? r.boolean("environment", "classical_load") : false;
    s.environment.aggregate_power_dbm = r.number_or("environment", "aggregate_power_dbm", 0.0);

    s.notch.suppression_db_at_quantum = r.number_or("notch", "suppression_db", 132.3);
    s.notch.passband_insertion_db = r.number_or("notch", "passband_insertion_db", 0.0);
    s.notch.validate();

    s.sounding.dwell_time_s = r.number_or("sounding", "dwell_time_ms", 1.0) * 1e-3;
    s.sounding.power_meter_noise_db = r.number_or("sounding", "power_meter_noise_db", 0.2);
    s.sounding.resound_period_s = r.number_or("sounding", "resound_period_s", 60.0);
    s.sounding.fade_trigger_db = r.number_or("sounding", "fade_trigger_db", 3.0);
    s.sounding.margin_db = r.number_or("sounding", "margin_db", 0.0);
    s.sounding.budget_threshold_db = r.number_or("sounding", "budget_threshold_db", 26.0);
    s.sounding.validate();

    s.anchors.sifted_0db_hz = r.number_or("anchors", "sifted_0db_hz", 54.3e3);
    s.anchors.qber_0db = r.number_or("anchors", "qber_0db", 0.0207);
    s.anchors.best_pair_loss_db = r.number_or("anchors", "best_pair_loss_db", 15.5);
    s.anchors.coexist_power_dbm = r.number_or("anchors", "coexist_power_dbm", 11.2);
    s.anchors.coexist_qber = r.number_or("anchors", "coexist_qber", 0.103);
    s.anchors.coexist_budget_db = r.number_or("anchors", "coexist_budget_db", 15.5);
    s.anchors.coexist_ambient_lux = r.number_or("anchors", "coexist_ambient_lux", 800.0);
    s.anchors.solar_irradiance_lux = r.number_or("anchors", "solar_irradiance_lux", 61e3);
    s.anchors.solar_counts_hz = r.has("anchors", "solar_counts_hz")
                                    ? r.number_list("anchors", "solar_counts_hz")
                                    : std::vector<double>{1204.0, 980.0};

    s.calibration.system_efficiency = r.optional_number("calibration", "system_efficiency");
    s.calibration.intrinsic_error = r.optional_number("calibration", "intrinsic_error");
    s.calibration.excess_loss_db = r.optional_number("calibration", "excess_loss_db");
    s.calibration.raman_coefficient = r.optional_number("calibration", "raman_coefficient");
    if (r.has("calibration", "solar_slopes_hz_per_lux"))
        s.calibration.solar_slopes_hz_per_lux =
            r.number_list("calibration", "solar_slopes_hz_per_lux");

    s.seed = r.has("seed", "value") ? r.unsigned_integer("seed", "value") : 1;

    if (s.tx_switch_count < 1 || s.tx_switch_count > s.lattice.element_count())
        throw ConfigError("tx switch_elements outside the lattice size");
    return s;
}

std::string scenario_to_text(const LinkScenario& s) {
    std::ostringstream os;
    os << "[lattice]\n";
    os << "pitch_um = " << format_units(s.lattice.pitch_m * 1e6) << "\n";
    os << "rings = " << s.lattice.rings << "\n";
    os << "mfd_um = " << format_units(s.lattice.mode_field_diameter_m * 1e6) << "\n\n";

    os << "[collimator]\n";
    os << "focal_length_mm = " << format_units(s.collimator.focal_length_m * 1e3) << "\n";
    os << "aperture_diameter_mm = " << format_units(s.collimator.aperture_diameter_m * 1e3)
       << "\n\n";

    os << "[link]\n";
    os << "distance_m = " << format_double(s.link.distance_m) << "\n";
    os << "wavelength_nm = " << format_units(s.link.wavelength_m * 1e9) << "\n";
    if (s.link.budget_db) os << "budget_db = " << format_double(*s.link.budget_db) << "\n";
    os << "\n";

    os << "[tx]\n";
    os << "boresight_x_urad = " << format_units(s.tx_pose.boresight_error_rad.x() * 1e6) << "\n";
    os << "boresight_y_urad = " << format_units(s.tx_pose.boresight_error_rad.y() * 1e6) << "\n";
    os << "switch_elements = " << s.tx_switch_count << "\n\n";

    os << "[rx]\n";
    os << "boresight_x_urad = " << format_units(s.rx_pose.boresight_error_rad.x() * 1e6) << "\n";
    os << "boresight_y_urad = " << format_units(s.rx_pose.boresight_error_rad.y() * 1e6) << "\n\n";

    os << "[source]\n";
    os << "symbol_rate_hz = " << format_double(s.source.symbol_rate_hz) << "\n";
    os << "mean_photon_number = " << format_double(s.source.mean_photon_number) << "\n";
    os << "duty_cycle = " << format_double(s.source.duty_cycle) << "\n\n";

    os << "[detector]\n";
    os << "efficiency = " << format_double(s.detector.efficiency) << "\n";
    os << "dead_time_us = " << format_units(s.detector.dead_time_s * 1e6) << "\n";
    os << "dark_rates_hz = " << format_list(s.detector.dark_rate_hz) << "\n";
    os << "timestamp_resolution_ps = " << format_units(s.detector.timestamp_resolution_s * 1e12)
       << "\n";
    os << "count = " << s.detector.count << "\n\n";

    os << "[environment]\n";
    os << "irradiance_lux = " << format_double(s.environment.irradiance_lux) << "\n";
    os << "classical_load = " << (s.environment.classical_load ? "true" : "false") << "\n";
    os << "aggregate_power_dbm = " << format_double(s.environment.aggregate_power_dbm) << "\n\n";

    os << "[notch]\n";
    os << "suppression_db = " << format_double(s.notch.suppression_db_at_quantum) << "\n";
    os << "passband_insertion_db = " << format_double(s.notch.passband_insertion_db) << "\n\n";

    os << "[sounding]\n";
    os << "dwell_time_ms = " << format_units(s.sounding.dwell_time_s * 1e3) << "\n";
    os << "power_meter_noise_db = " << format_double(s.sounding.power_meter_noise_db) << "\n";
    os << "resound_period_s = " << format_double(s.sounding.resound_period_s) << "\n";
    os << "fade_trigger_db = " << format_double(s.sounding.fade_trigger_db) << "\n";
    os << "margin_db = " << format_double(s.sounding.margin_db) << "\n";
    os << "budget_threshold_db = " << format_double(s.sounding.budget_threshold_db) << "\n\n";

    os << "[anchors]\n";
    os << "sifted_0db_hz = " << format_double(s.anchors.sifted_0db_hz) << "\n";
    os << "qber_0db = " << format_double(s.anchors.qber_0db) << "\n";
    os << "best_pair_loss_db = " << format_double(s.anchors.best_pair_loss_db) << "\n";
    os << "coexist_power_dbm = " << format_double(s.anchors.coexist_power_dbm) << "\n";
    os << "coexist_qber = " << format_double(s.anchors.coexist_qber) << "\n";
    os << "coexist_budget_db = " << format_double(s.anchors.coexist_budget_db) << "\n";
    os << "coexist_ambient_lux = " << format_double(s.anchors.coexist_ambient_lux) << "\n";
    os << "solar_irradiance_lux = " << format_double(s.anchors.solar_irradiance_lux) << "\n";
    os << "solar_counts_hz = " << format_list(s.anchors.solar_counts_hz) << "\n\n";

    os << "[calibration]\n";
    if (s.calibration.system_efficiency)
        os << "system_efficiency = " << format_double(*s.calibration.system_efficiency) << "\n";
    if (s.calibration.intrinsic_error)
        os << "intrinsic_error = " << format_double(*s.calibration.intrinsic_error) << "\n";
    if (s.calibration.excess_loss_db)
        os << "excess_loss_db = " << format_double(*s.calibration.excess_loss_db) << "\n";
    if (s.calibration.raman_coefficient)
        os << "raman_coefficient = " << format_double(*s.calibration.raman_coefficient) << "\n";
    if (s.calibration.solar_slopes_hz_per_lux)
        os << "solar_slopes_hz_per_lux = " << format_list(*s.calibration.solar_slopes_hz_per_lux)
           << "\n";
    os << "\n[seed]\n";
    os << "value = " << s.seed << "\n";
    return os.str();
}

void save_scenario(const std::filesystem::path& file, const LinkScenario& scenario) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw ConfigError("cannot write scenario file: " + file.string());
    out << scenario_to_text(scenario);
}

}  // namespace fsoqkd
