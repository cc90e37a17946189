#include "fsoqkd/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "fsoqkd/rng.hpp"

namespace fsoqkd {

namespace {

struct Candidate {
    std::uint64_t tick;
    std::uint32_t order;  // generation order, breaks same-tick ties
    std::uint8_t from_signal;
    std::uint8_t basis_matched;
    std::uint8_t true_state;
    std::uint8_t measured_state;
};

const char* state_name(std::uint8_t s) {
    switch (s) {
        case 0: return "H";
        case 1: return "V";
        case 2: return "R";
        case 3: return "L";
        default: return "-";
    }
}

void append_le(std::string& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

SimRun generate_tags(const LinkParameters& params, double budget_db, double duration_s,
                     std::uint64_t seed) {
    if (duration_s <= 0.0) throw std::invalid_argument("run duration must be > 0");
    if (budget_db < 0.0) throw std::invalid_argument("budget must be >= 0 dB");
    params.source.validate();
    params.detector.validate();
    params.environment.validate();
    if (params.environment.background_rate_hz.size() !=
        static_cast<std::size_t>(params.detector.count))
        throw std::invalid_argument("need one background rate per detector");

    SimRun run;
    run.seed = seed;
    run.duration_s = duration_s;
    run.resolution_s = params.detector.timestamp_resolution_s;
    run.budget_db = budget_db;
    run.intrinsic_error = params.environment.intrinsic_error;
    const double dead_over_res = params.detector.dead_time_s / run.resolution_s;
    run.dead_ticks = static_cast<std::uint64_t>(std::ceil(dead_over_res - 1e-9));

    // Matched-basis photon arrivals per detector, ahead of the dead-time veto.
    const double survival =
        std::pow(10.0, -budget_db / 10.0) * params.system_efficiency;
    const double sifted_pre = params.source.symbol_rate_hz * params.source.mean_photon_number *
                              survival * params.detector.efficiency * 0.5;
    const double per_detector = sifted_pre / params.detector.count;

    const double symbol_period_s = 1.0 / params.source.symbol_rate_hz;
    const double ticks_per_symbol = symbol_period_s / run.resolution_s;

    for (int det = 0; det < params.detector.count; ++det) {
        const auto k = static_cast<std::size_t>(det);
        // Detector 0 measures in the H/V basis, detector 1 in R/L.
        const std::uint8_t basis_base = det == 0 ? 0 : 2;

        std::vector<Candidate> candidates;
        const double noise_rate =
            params.detector.dark_rate_hz[k] + params.environment.background_rate_hz[k];
        candidates.reserve(static_cast<std::size_t>((per_detector + noise_rate) * duration_s * 1.05) +
                           16);

        std::uint32_t order = 0;
        if (per_detector > 0.0) {
            Rng rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(det)));
            const double mean_gap = 1.0 / per_detector;
            for (double t = rng.exponential(mean_gap); t < duration_s;
                 t += rng.exponential(mean_gap)) {
                const auto slot = static_cast<std::uint64_t>(t / symbol_period_s);
                const std::uint8_t bit = rng.bernoulli(0.5) ? 1 : 0;
                const bool flip = rng.bernoulli(params.environment.intrinsic_error);
                const auto prepared = static_cast<std::uint8_t>(basis_base + bit);
                const auto measured = static_cast<std::uint8_t>(basis_base + (flip ? bit ^ 1 : bit));
                const auto tick = static_cast<std::uint64_t>(
                    std::llround(static_cast<double>(slot) * ticks_per_symbol));
                candidates.push_back(Candidate{tick, order++, 1, 1, prepared, measured});
            }
        }
        if (noise_rate > 0.0) {
            Rng rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(det) + 1));
            const double mean_gap = 1.0 / noise_rate;
            for (double t = rng.exponential(mean_gap); t < duration_s;
                 t += rng.exponential(mean_gap)) {
                const bool matched = rng.bernoulli(0.5);
                const std::uint8_t prepared_bit = rng.bernoulli(0.5) ? 1 : 0;
                const std::uint8_t measured_bit = rng.bernoulli(0.5) ? 1 : 0;
                // Prepared state sits in the other basis when unmatched.
                const std::uint8_t prepared_base = matched ? basis_base : (basis_base ^ 2);
                const auto tick =
                    static_cast<std::uint64_t>(std::llround(t / run.resolution_s));
                candidates.push_back(Candidate{
                    tick, order++, 0, static_cast<std::uint8_t>(matched ? 1 : 0),
                    static_cast<std::uint8_t>(prepared_base + prepared_bit),
                    static_cast<std::uint8_t>(basis_base + measured_bit)});
            }
        }

        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.tick != b.tick) return a.tick < b.tick;
            return a.order < b.order;
        });

        // Non-paralyzable veto in time order.
        bool first = true;
        std::uint64_t last_tick = 0;
        for (const Candidate& c : candidates) {
            if (first || c.tick - last_tick >= run.dead_ticks) {
                run.tags.push_back(TimeTag{c.tick, static_cast<std::uint8_t>(det),
                                           c.from_signal != 0, c.basis_matched != 0, c.true_state,
                                           c.measured_state});
                last_tick = c.tick;
                first = false;
            }
        }
    }

    std::sort(run.tags.begin(), run.tags.end(), [](const TimeTag& a, const TimeTag& b) {
        if (a.tick != b.tick) return a.tick < b.tick;
        return a.detector_id < b.detector_id;
    });
    return run;
}

SiftSummary sift_and_estimate(const SimRun& run) {
    if (run.duration_s <= 0.0) throw std::invalid_argument("run duration must be > 0");
    SiftSummary summary;
    summary.duration_s = run.duration_s;
    std::uint8_t max_det = 0;
    for (const TimeTag& t : run.tags) max_det = std::max(max_det, t.detector_id);
    summary.counts_per_detector.assign(static_cast<std::size_t>(max_det) + 1, 0);
    for (const TimeTag& t : run.tags) {
        ++summary.counts_per_detector[t.detector_id];
        if (t.basis_matched) {
            ++summary.sifted_count;
            if (t.measured_state != t.true_state) ++summary.error_count;
        }
    }
    summary.sifted_rate_hz = static_cast<double>(summary.sifted_count) / run.duration_s;
    if (summary.sifted_count > 0)
        summary.qber =
            static_cast<double>(summary.error_count) / static_cast<double>(summary.sifted_count);
    return summary;
}

void tags_to_binary(std::ostream& os, const SimRun& run) {
    std::string header;
    header.reserve(16);
    header += "FSOQ";
    append_le(header, 1, 2);  // version
    append_le(header, 0, 2);  // reserved
    const auto resolution_fs = static_cast<std::uint64_t>(std::llround(run.resolution_s * 1e15));
    append_le(header, resolution_fs, 8);
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::string record;
    for (const TimeTag& t : run.tags) {
        record.clear();
        record.push_back(static_cast<char>(t.detector_id));
        append_le(record, t.tick, 8);
        os.write(record.data(), static_cast<std::streamsize>(record.size()));
    }
}

void tags_to_csv(std::ostream& os, const SimRun& run) {
    os << "detector_id,tick,time_s,origin,true_state,measured_state,basis_matched\n";
    char line[128];
    for (const TimeTag& t : run.tags) {
        std::snprintf(line, sizeof line, "%u,%llu,%.12e,%s,%s,%s,%d\n",
                      static_cast<unsigned>(t.detector_id),
                      static_cast<unsigned long long>(t.tick),
                      static_cast<double>(t.tick) * run.resolution_s,
                      t.from_signal ? "signal" : "noise", state_name(t.true_state),
                      state_name(t.measured_state), t.basis_matched ? 1 : 0);
        os << line;
    }
}

}  // namespace fsoqkd
