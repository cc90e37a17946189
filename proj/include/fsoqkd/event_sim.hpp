// Monte Carlo time-tag engine: per-pulse photon statistics, detector firing
// with dead time and timestamp quantization, and offline sifting/QBER
// estimation. Serves as the statistical cross-check for the analytic chain.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fsoqkd/qkd_rates.hpp"

namespace fsoqkd {

/// Polarization states; 0/1 share one measurement basis, 2/3 the other.
enum class PolState : std::uint8_t { H = 0, V = 1, R = 2, L = 3 };

constexpr std::uint8_t kNoState = 0xff;

/// One detector click. Timestamps are integer multiples of the timing
/// resolution; consecutive ticks on one detector are separated by at least
/// the dead time. The state fields are simulation ground truth used only by
/// the offline evaluation; the wire format carries detector and tick alone.
struct TimeTag {
    std::uint64_t tick = 0;
    std::uint8_t detector_id = 0;
    bool from_signal = false;     // photon click vs dark/ambient count
    bool basis_matched = false;   // prepared basis equals measurement basis
    std::uint8_t true_state = kNoState;      // prepared state for the slot
    std::uint8_t measured_state = kNoState;  // analyzer outcome
};

struct SimRun {
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    double resolution_s = 82.3e-12;
    std::uint64_t dead_ticks = 0;
    double budget_db = 0.0;
    double intrinsic_error = 0.0;
    std::vector<TimeTag> tags;  // sorted by (tick, detector)
};

/// Generate a seeded run. Matched-basis photon detections and noise counts
/// arrive as independent Poisson streams per detector (photon clicks pinned
/// to their 1/symbol_rate slots), then a non-paralyzable dead-time veto and
/// tick quantization are applied per detector in time order. The detector
/// load mirrors the analytic chain's bookkeeping, where sifting sits ahead
/// of saturation, so the two stay comparable point by point.
SimRun generate_tags(const LinkParameters& params, double budget_db, double duration_s,
                     std::uint64_t seed);

struct SiftSummary {
    double duration_s = 0.0;
    std::vector<std::uint64_t> counts_per_detector;
    std::uint64_t sifted_count = 0;
    std::uint64_t error_count = 0;
    double sifted_rate_hz = 0.0;
    std::optional<double> qber;  // empty when no sifted events exist
};

/// Keep matched-basis tags, count errors against the prepared states, and
/// normalize by the run duration.
SiftSummary sift_and_estimate(const SimRun& run);

/// Binary tag stream: 16-byte header (magic "FSOQ", u16 version, u16
/// reserved, u64 resolution in femtoseconds), then little-endian records of
/// (u8 detector_id, u64 tick).
void tags_to_binary(std::ostream& os, const SimRun& run);

void tags_to_csv(std::ostream& os, const SimRun& run);

}  // namespace fsoqkd
