#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "fsoqkd/event_sim.hpp"

using namespace fsoqkd;

namespace {

LinkParameters b2b_like_parameters() {
    LinkParameters p;
    // Representative of the calibrated bench: deep-saturation operating point.
    p.system_efficiency = 0.0339;
    p.environment.intrinsic_error = 0.019;
    return p;
}

}  // namespace

TEST_CASE("no source, no noise, no tags") {
    LinkParameters p;
    p.system_efficiency = 1e-30;  // effectively mu = 0
    p.detector.dark_rate_hz = {0.0, 0.0};
    const SimRun run = generate_tags(p, 0.0, 0.5, 3);
    CHECK(run.tags.empty());
    const SiftSummary s = sift_and_estimate(run);
    CHECK(s.sifted_count == 0);
    CHECK(!s.qber.has_value());
}

TEST_CASE("per-detector gaps respect the dead time and ticks are exact") {
    const SimRun run = generate_tags(b2b_like_parameters(), 0.0, 1.0, 11);
    REQUIRE(!run.tags.empty());
    CHECK(run.dead_ticks == 303767);  // ceil(25 us / 82.3 ps)
    std::map<std::uint8_t, std::uint64_t> last;
    for (const TimeTag& t : run.tags) {
        const auto it = last.find(t.detector_id);
        if (it != last.end()) {
            CHECK(t.tick - it->second >= run.dead_ticks);
            CHECK(static_cast<double>(t.tick - it->second) * run.resolution_s >= 25e-6);
        }
        last[t.detector_id] = t.tick;
    }
}

TEST_CASE("dark-only run reproduces the configured dark rates") {
    LinkParameters p;
    p.system_efficiency = 1e-30;
    const SimRun run = generate_tags(p, 0.0, 10.0, 21);
    const SiftSummary s = sift_and_estimate(run);
    REQUIRE(s.counts_per_detector.size() == 2);
    for (std::size_t det = 0; det < 2; ++det) {
        const double expected = p.detector.dark_rate_hz[det];
        const double observed = static_cast<double>(s.counts_per_detector[det]) / run.duration_s;
        const double sigma = std::sqrt(static_cast<double>(s.counts_per_detector[det])) /
                             run.duration_s;
        CHECK(std::abs(observed - expected) <= 3.0 * sigma);
    }
    // Random counts land near 50% error after sifting.
    REQUIRE(s.qber.has_value());
    const double sigma_q =
        std::sqrt(0.25 / static_cast<double>(s.sifted_count));
    CHECK(std::abs(*s.qber - 0.5) <= 3.0 * sigma_q);
}

TEST_CASE("error-free configuration yields zero QBER") {
    LinkParameters p = b2b_like_parameters();
    p.environment.intrinsic_error = 0.0;
    p.detector.dark_rate_hz = {0.0, 0.0};
    const SimRun run = generate_tags(p, 0.0, 0.2, 5);
    const SiftSummary s = sift_and_estimate(run);
    REQUIRE(s.sifted_count > 0);
    CHECK(s.error_count == 0);
    CHECK(*s.qber == 0.0);
}

TEST_CASE("empirical rate and error agree with the analytic chain") {
    const LinkParameters p = b2b_like_parameters();
    const double budget = 0.0;
    const SimRun run = generate_tags(p, budget, 10.0, 42);
    const SiftSummary s = sift_and_estimate(run);
    const KeyRateReport analytic = evaluate(p, budget);

    const double rate_sigma = std::sqrt(static_cast<double>(s.sifted_count)) / run.duration_s;
    CHECK(std::abs(s.sifted_rate_hz - analytic.sifted_rate_hz) <= 3.0 * rate_sigma);

    REQUIRE(s.qber.has_value());
    const double q = *s.qber;
    const double q_sigma = std::sqrt(q * (1.0 - q) / static_cast<double>(s.sifted_count));
    CHECK(std::abs(q - analytic.qber) <= 3.0 * q_sigma);
}

TEST_CASE("same seed serializes byte-identical tag streams") {
    const LinkParameters p = b2b_like_parameters();
    std::ostringstream a, b, c;
    tags_to_binary(a, generate_tags(p, 10.0, 0.5, 77));
    tags_to_binary(b, generate_tags(p, 10.0, 0.5, 77));
    tags_to_binary(c, generate_tags(p, 10.0, 0.5, 78));
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
}

TEST_CASE("binary stream layout") {
    LinkParameters p;
    p.system_efficiency = 1e-30;
    p.detector.dark_rate_hz = {2000.0, 0.0};
    const SimRun run = generate_tags(p, 0.0, 0.05, 9);
    std::ostringstream os;
    tags_to_binary(os, run);
    const std::string bytes = os.str();
    REQUIRE(bytes.size() >= 16);
    CHECK(bytes.compare(0, 4, "FSOQ") == 0);
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version, little-endian
    CHECK(static_cast<unsigned char>(bytes[5]) == 0);
    // Resolution of 82.3 ps is 82300 fs = 0x1417C.
    CHECK(static_cast<unsigned char>(bytes[8]) == 0x7c);
    CHECK(static_cast<unsigned char>(bytes[9]) == 0x41);
    CHECK(static_cast<unsigned char>(bytes[10]) == 0x01);
    CHECK((bytes.size() - 16) % 9 == 0);
    CHECK((bytes.size() - 16) / 9 == run.tags.size());
}

TEST_CASE("CSV export lists matched and unmatched tags") {
    const LinkParameters p = b2b_like_parameters();
    const SimRun run = generate_tags(p, 0.0, 0.001, 13);
    std::ostringstream os;
    tags_to_csv(os, run);
    const std::string text = os.str();
    CHECK(text.rfind("detector_id,tick,time_s,origin,true_state,measured_state,basis_matched\n",
                     0) == 0);
    CHECK(text.find("signal") != std::string::npos);
}
