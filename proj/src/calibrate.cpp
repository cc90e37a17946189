#include "fsoqkd/calibrate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fsoqkd {

namespace {

/// Bisection for a continuous monotone function with f(lo) and f(hi) of
/// opposite sign.
template <typename F>
double bisect(F&& f, double lo, double hi, int iterations = 200) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::runtime_error("calibration root not bracketed");
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

LinkParameters pristine_parameters(const LinkScenario& scenario, double system_efficiency,
                                   double intrinsic_error) {
    LinkParameters params;
    params.source = scenario.source;
    params.detector = scenario.detector;
    params.environment.background_rate_hz.assign(
        static_cast<std::size_t>(scenario.detector.count), 0.0);
    params.environment.intrinsic_error = intrinsic_error;
    params.system_efficiency = system_efficiency;
    return params;
}

}  // namespace

double fit_system_efficiency(const LinkScenario& scenario) {
    const double target = scenario.anchors.sifted_0db_hz;
    // The dead-time ceiling caps what any efficiency can deliver.
    const double ceiling = scenario.detector.count /
                           (scenario.detector.dead_time_s > 0.0 ? scenario.detector.dead_time_s
                                                                : 1e-12);
    if (target >= ceiling)
        throw std::runtime_error("sifted-rate anchor " + std::to_string(target) +
                                 " Hz exceeds the dead-time ceiling of " +
                                 std::to_string(ceiling) + " Hz");
    auto gap = [&](double eta) {
        const LinkParameters params = pristine_parameters(scenario, eta, 0.0);
        return detection_rates(params.source, params.detector, params.environment, 0.0, eta)
                   .sifted_total_hz -
               target;
    };
    return bisect(gap, 1e-8, 1.0);
}

double fit_intrinsic_error(const LinkScenario& scenario, double system_efficiency) {
    const LinkParameters params = pristine_parameters(scenario, system_efficiency, 0.0);
    const DetectionRates rates =
        detection_rates(params.source, params.detector, params.environment, 0.0,
                        system_efficiency);
    const double s = rates.sifted_signal_hz;
    const double b = rates.sifted_background_hz;
    const double q0 = scenario.anchors.qber_0db;
    const double e = (q0 * (s + b) - 0.5 * b) / s;
    if (e < 0.0 || e >= 0.5)
        throw std::runtime_error("QBER anchor cannot be met: implied intrinsic error " +
                                 std::to_string(e));
    return e;
}

double fit_excess_loss_db(const LinkScenario& scenario) {
    LinkScenario zero_excess = scenario;
    zero_excess.calibration.excess_loss_db = 0.0;
    const double geometric_best = zero_excess.coupling_map().best().loss_db;
    const double target = scenario.anchors.best_pair_loss_db;
    const double per_terminal = 0.5 * (target - geometric_best);
    if (per_terminal < 2.0)
        throw std::runtime_error(
            "best-pair anchor leaves less than the 2 dB insertion floor per terminal "
            "(geometric share " +
            std::to_string(geometric_best) + " dB)");
    return per_terminal;
}

double fit_raman_coefficient(const LinkScenario& scenario, double system_efficiency,
                             double intrinsic_error) {
    // The Raman coefficient is a property of the receiver and its fiber tails,
    // so it is always fitted under the coexistence-bench conditions recorded
    // in the anchors, not under this scenario's own lighting or budget.
    const ChannelPlan plan = build_channel_plan();
    const double budget = scenario.anchors.coexist_budget_db;
    LinkParameters base = pristine_parameters(scenario, system_efficiency, intrinsic_error);
    if (scenario.anchors.coexist_ambient_lux > 0.0) {
        if (!scenario.calibration.solar_slopes_hz_per_lux)
            throw std::runtime_error("Raman fit needs solar slopes for the bench ambient");
        const auto& slopes = *scenario.calibration.solar_slopes_hz_per_lux;
        for (std::size_t i = 0; i < base.environment.background_rate_hz.size(); ++i)
            base.environment.background_rate_hz[i] =
                slopes[i] * scenario.anchors.coexist_ambient_lux;
    }

    auto qber_at = [&](double rho) {
        LinkParameters loaded = base;
        const double added = coexistence_noise_rate_hz(plan, scenario.anchors.coexist_power_dbm,
                                                       scenario.notch, scenario.detector, rho) /
                             scenario.detector.count;
        for (double& bg : loaded.environment.background_rate_hz) bg += added;
        return evaluate(loaded, budget).qber;
    };

    const double target = scenario.anchors.coexist_qber;
    if (qber_at(0.0) >= target)
        throw std::runtime_error(
            "coexistence QBER anchor already exceeded by filter leakage alone");
    return bisect([&](double rho) { return qber_at(rho) - target; }, 0.0, 1e-9);
}

std::vector<double> fit_solar_slopes(const LinkScenario& scenario) {
    const auto& counts = scenario.anchors.solar_counts_hz;
    if (counts.size() != scenario.detector.dark_rate_hz.size())
        throw std::runtime_error("need one solar count anchor per detector");
    if (scenario.anchors.solar_irradiance_lux <= 0.0)
        throw std::runtime_error("solar irradiance anchor must be > 0");
    std::vector<double> slopes(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double excess = counts[i] - scenario.detector.dark_rate_hz[i];
        if (excess < 0.0)
            throw std::runtime_error("solar count anchor below the dark rate for detector " +
                                     std::to_string(i));
        slopes[i] = excess / scenario.anchors.solar_irradiance_lux;
    }
    return slopes;
}

Calibration calibrate_all(const LinkScenario& scenario) {
    Calibration cal;
    cal.system_efficiency = fit_system_efficiency(scenario);
    cal.intrinsic_error = fit_intrinsic_error(scenario, *cal.system_efficiency);
    cal.solar_slopes_hz_per_lux = fit_solar_slopes(scenario);
    cal.excess_loss_db = fit_excess_loss_db(scenario);
    // The Raman fit needs the ambient background in place.
    LinkScenario with_slopes = scenario;
    with_slopes.calibration = cal;
    cal.raman_coefficient = fit_raman_coefficient(with_slopes, *cal.system_efficiency,
                                                  *cal.intrinsic_error);
    return cal;
}

}  // namespace fsoqkd
