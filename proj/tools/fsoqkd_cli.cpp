// Command-line front end: loads a scenario file and regenerates coupling
// maps, rate sweeps, Monte Carlo tag streams, capacity conversions and
// calibration constants as CSV/JSON artifacts.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fsoqkd/calibrate.hpp"
#include "fsoqkd/coexistence.hpp"
#include "fsoqkd/event_sim.hpp"
#include "fsoqkd/scenario.hpp"
#include "fsoqkd/sounding.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fsoqkd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
    std::string scenario_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_scenario = true) {
    if (needs_scenario)
        cmd->add_option("-s,--scenario", opts.scenario_path, "scenario file")->required();
    cmd->add_option("-o,--out-dir", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", opts.seed_override, "override the scenario seed");
}

LinkScenario load_with_seed(const CommonOptions& opts) {
    LinkScenario scenario = load_scenario(opts.scenario_path);
    if (opts.seed_override) scenario.seed = *opts.seed_override;
    return scenario;
}

std::ofstream open_output(const CommonOptions& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    const fs::path path = fs::path(opts.out_dir) / name;
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    return out;
}

void print_provenance(const LinkScenario& s) {
    std::cout << "seed = " << s.seed << "\n";
    auto show = [](const char* name, const std::optional<double>& v) {
        if (v) std::cout << name << " = " << *v << "\n";
    };
    show("system_efficiency", s.calibration.system_efficiency);
    show("intrinsic_error", s.calibration.intrinsic_error);
    show("excess_loss_db", s.calibration.excess_loss_db);
    show("raman_coefficient", s.calibration.raman_coefficient);
    if (s.calibration.solar_slopes_hz_per_lux) {
        std::cout << "solar_slopes_hz_per_lux =";
        for (double v : *s.calibration.solar_slopes_hz_per_lux) std::cout << ' ' << v;
        std::cout << "\n";
    }
}

std::vector<double> make_grid(double start, double stop, double step) {
    if (step <= 0.0) throw ConfigError("grid step must be > 0");
    if (stop < start) throw ConfigError("grid stop must be >= start");
    std::vector<double> grid;
    for (double v = start; v <= stop + 0.5 * step; v += step) grid.push_back(v);
    return grid;
}

nlohmann::json report_to_json(const KeyRateReport& r) {
    return {{"budget_db", r.budget_db},         {"sifted_hz", r.sifted_rate_hz},
            {"qber", r.qber},                   {"skr_hz", r.secure_rate_hz},
            {"fiber_km", r.fiber_equiv_km},     {"capacity_bps", r.secured_capacity_bps}};
}

void write_reports(const CommonOptions& opts, const std::string& stem, const char* axis_name,
                   const std::vector<double>& axis, const std::vector<KeyRateReport>& reports) {
    if (opts.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (std::size_t i = 0; i < reports.size(); ++i) {
            nlohmann::json row = report_to_json(reports[i]);
            row[axis_name] = axis[i];
            j.push_back(row);
        }
        open_output(opts, stem + ".json") << j.dump(2) << '\n';
    } else {
        auto out = open_output(opts, stem + ".csv");
        reports_to_csv(out, axis_name, axis, reports);
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_map(const CommonOptions& opts) {
    const LinkScenario scenario = load_with_seed(opts);
    print_provenance(scenario);

    const Terminal tx = scenario.tx_terminal();
    const Terminal rx = scenario.rx_terminal();
    const GaussianBeam beam = collimate(tx.lattice, tx.collimator, scenario.link.wavelength_m);
    if (scenario.link.distance_m >= rayleigh_range_m(beam))
        std::cerr << "warning: link distance " << scenario.link.distance_m
                  << " m reaches the Rayleigh range; the collimated model is optimistic\n";

    MapSource source;
    source.tx_ids = tx.switch_ids;
    source.rx_ids = rx.switch_ids;
    source.distance_m = scenario.link.distance_m;
    source.loss_db = [&](int t, int r) {
        return pair_coupling_db(tx, element_from_id(tx.lattice, t), rx,
                                element_from_id(rx.lattice, r), scenario.link.distance_m,
                                scenario.link.wavelength_m);
    };
    const SoundingSession session = run_sounding(source, scenario.sounding, scenario.seed);
    if (!session.complete) throw std::runtime_error("sounding sweep aborted");

    {
        auto out = open_output(opts, "coupling_map.csv");
        coupling_map_to_csv(out, session.map);
    }
    open_output(opts, "coupling_map.json")
        << coupling_map_to_json(session.map, tx.pose, rx.pose, scenario.seed) << '\n';
    {
        auto out = open_output(opts, "ranking.csv");
        ranking_to_csv(out, session.ranking);
    }
    {
        auto out = open_output(opts, "sounding_trace.jsonl");
        trace_to_jsonl(out, session.trace);
    }

    const RankedPair& best = select_pair(session.ranking);
    nlohmann::json summary;
    summary["best"] = {{"tx_id", best.tx_id}, {"rx_id", best.rx_id}, {"loss_db", best.loss_db}};
    summary["usable_pairs"] = session.ranking.usable_count;
    summary["fallbacks_within_3db"] = session.ranking.count_within_of_best(3.0);
    summary["pairs_measured"] = session.ranking.entries.size();
    summary["distance_m"] = scenario.link.distance_m;
    open_output(opts, "map_summary.json") << summary.dump(2) << '\n';

    std::cout << "best pair: tx " << best.tx_id << " -> rx " << best.rx_id << " at "
              << best.loss_db << " dB, " << session.ranking.usable_count
              << " usable pairs\n";
    return kExitOk;
}

int cmd_sweep_budget(const CommonOptions& opts, double start, double stop, double step) {
    const LinkScenario scenario = load_with_seed(opts);
    print_provenance(scenario);
    const auto grid = make_grid(start, stop, step);
    const auto reports = sweep_budget(scenario.link_parameters(), grid);
    write_reports(opts, "sweep_budget", "budget_db", grid, reports);
    std::cout << "wrote " << reports.size() << " budget points\n";
    return kExitOk;
}

int cmd_sweep_power(const CommonOptions& opts, double start, double stop, double step) {
    const LinkScenario scenario = load_with_seed(opts);
    print_provenance(scenario);
    if (!scenario.calibration.raman_coefficient)
        throw ConfigError("calibration value 'raman_coefficient' missing; run calibrate first");

    // Ambient-only baseline; the sweep layers the classical load on top.
    LinkScenario unloaded = scenario;
    unloaded.environment.classical_load = false;
    const double budget = unloaded.resolved_budget_db();

    const auto grid = make_grid(start, stop, step);
    const auto reports =
        sweep_classical_power(unloaded.link_parameters(), budget, build_channel_plan(),
                              scenario.notch, *scenario.calibration.raman_coefficient, grid);
    write_reports(opts, "sweep_power", "p_cla_dbm", grid, reports);
    std::cout << "wrote " << reports.size() << " power points at budget " << budget << " dB\n";
    return kExitOk;
}

int cmd_montecarlo(const CommonOptions& opts, double duration_s) {
    const LinkScenario scenario = load_with_seed(opts);
    print_provenance(scenario);
    const double budget = scenario.resolved_budget_db();
    const LinkParameters params = scenario.link_parameters();

    const SimRun run = generate_tags(params, budget, duration_s, scenario.seed);
    const SiftSummary summary = sift_and_estimate(run);
    const KeyRateReport analytic = evaluate(params, budget);

    {
        auto out = open_output(opts, "tags.bin");
        tags_to_binary(out, run);
    }
    if (opts.format == "csv") {
        auto out = open_output(opts, "tags.csv");
        tags_to_csv(out, run);
    }

    nlohmann::json j;
    j["budget_db"] = budget;
    j["duration_s"] = run.duration_s;
    j["seed"] = run.seed;
    j["tags"] = run.tags.size();
    j["counts_per_detector"] = summary.counts_per_detector;
    j["sifted_rate_hz"] = summary.sifted_rate_hz;
    if (summary.qber) j["qber"] = *summary.qber;
    j["analytic_sifted_rate_hz"] = analytic.sifted_rate_hz;
    j["analytic_qber"] = analytic.qber;
    open_output(opts, "estimates.json") << j.dump(2) << '\n';

    std::cout << "sifted " << summary.sifted_rate_hz << " Hz (analytic "
              << analytic.sifted_rate_hz << " Hz)";
    if (summary.qber)
        std::cout << ", QBER " << *summary.qber << " (analytic " << analytic.qber << ")";
    std::cout << "\n";
    return kExitOk;
}

int cmd_capacity(const CommonOptions& opts, double skr_bps) {
    const double capacity = aes_gcm_secured_capacity_bps(skr_bps);
    nlohmann::json j;
    j["skr_bps"] = skr_bps;
    j["secured_capacity_bps"] = capacity;
    if (opts.format == "json") {
        open_output(opts, "capacity.json") << j.dump(2) << '\n';
    } else {
        auto out = open_output(opts, "capacity.csv");
        out << "skr_bps,secured_capacity_bps\n";
        char line[64];
        std::snprintf(line, sizeof line, "%.3f,%.6e\n", skr_bps, capacity);
        out << line;
    }
    std::cout << "secured capacity: " << capacity << " b/s\n";
    return kExitOk;
}

int cmd_plan(const CommonOptions& opts) {
    const ChannelPlan plan = build_channel_plan();
    auto out = open_output(opts, "channel_plan.csv");
    channel_plan_to_csv(out, plan);
    std::cout << "wrote " << plan.channels.size() << " channels, detuning "
              << plan.min_detuning_hz() * 1e-9 << " GHz to " << plan.max_detuning_hz() * 1e-12
              << " THz\n";
    return kExitOk;
}

int cmd_calibrate(const CommonOptions& opts, const std::string& out_file, bool in_place) {
    LinkScenario scenario = load_with_seed(opts);
    scenario.calibration = calibrate_all(scenario);
    print_provenance(scenario);
    if (in_place)
        save_scenario(opts.scenario_path, scenario);
    else if (!out_file.empty())
        save_scenario(out_file, scenario);
    else
        std::cout << scenario_to_text(scenario);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free-space optical QKD link simulator"};
    app.require_subcommand(1);

    CommonOptions opts;

    auto* map = app.add_subcommand("map", "coupling map, ranking and sounding trace");
    add_common(map, opts);

    auto* sweep_budget_cmd = app.add_subcommand("sweep-budget", "rate/QBER vs optical budget");
    add_common(sweep_budget_cmd, opts);
    double budget_start = 0.0, budget_stop = 30.0, budget_step = 0.5;
    sweep_budget_cmd->add_option("--start", budget_start, "first budget, dB");
    sweep_budget_cmd->add_option("--stop", budget_stop, "last budget, dB");
    sweep_budget_cmd->add_option("--step", budget_step, "budget step, dB");

    auto* sweep_power_cmd =
        app.add_subcommand("sweep-power", "rate/QBER vs aggregate classical power");
    add_common(sweep_power_cmd, opts);
    double power_start = -10.0, power_stop = 12.0, power_step = 0.5;
    sweep_power_cmd->add_option("--start", power_start, "first power, dBm");
    sweep_power_cmd->add_option("--stop", power_stop, "last power, dBm");
    sweep_power_cmd->add_option("--step", power_step, "power step, dBm");

    auto* montecarlo = app.add_subcommand("montecarlo", "seeded time-tag simulation");
    add_common(montecarlo, opts);
    double duration_s = 10.0;
    montecarlo->add_option("--duration-s", duration_s, "simulated duration, seconds");

    auto* capacity = app.add_subcommand("capacity", "AES-GCM securable capacity for a key rate");
    add_common(capacity, opts, false);
    double skr_bps = 0.0;
    capacity->add_option("--skr", skr_bps, "secure-key rate, b/s")->required();

    auto* plan = app.add_subcommand("plan", "classical channel plan");
    add_common(plan, opts, false);

    auto* calibrate = app.add_subcommand("calibrate", "fit scenario constants to its anchors");
    add_common(calibrate, opts);
    std::string calibrate_out;
    bool in_place = false;
    calibrate->add_option("--out", calibrate_out, "write the calibrated scenario here");
    calibrate->add_flag("--in-place", in_place, "rewrite the scenario file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (map->parsed()) return cmd_map(opts);
        if (sweep_budget_cmd->parsed())
            return cmd_sweep_budget(opts, budget_start, budget_stop, budget_step);
        if (sweep_power_cmd->parsed())
            return cmd_sweep_power(opts, power_start, power_stop, power_step);
        if (montecarlo->parsed()) return cmd_montecarlo(opts, duration_s);
        if (capacity->parsed()) return cmd_capacity(opts, skr_bps);
        if (plan->parsed()) return cmd_plan(opts);
        if (calibrate->parsed()) return cmd_calibrate(opts, calibrate_out, in_place);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
