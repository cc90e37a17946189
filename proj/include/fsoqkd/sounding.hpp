// Time-interleaved channel-sounding protocol: a transmit-side controller and
// a remotely controlled receive-side agent sweep every element pair, build a
// ranked coupling map, and pick fallbacks when the channel fades.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "fsoqkd/beam_optics.hpp"

namespace fsoqkd {

struct SoundingConfig {
    double dwell_time_s = 1e-3;          // per pair measurement
    double power_meter_noise_db = 0.2;   // std-dev of measurement noise
    double resound_period_s = 60.0;
    double fade_trigger_db = 3.0;        // power drop that triggers failover
    double margin_db = 0.0;              // required headroom below the budget
    double budget_threshold_db = 26.0;   // loss budget a usable pair must meet
    void validate() const;
};

enum class MessageKind : std::uint8_t { BeginSound, SetTx, SetRx, Report, EndSound, Ack, Nack };

const char* to_string(MessageKind kind);

struct SoundingMessage {
    MessageKind kind;
    int sequence = 0;           // strictly increasing per session
    double timestamp_s = 0.0;
    int tx_id = -1;             // SetTx / Report
    int rx_id = -1;             // SetRx / Report
    double power_dbm = 0.0;     // Report only; 0 dBm probe convention
};

struct RankedPair {
    int tx_id = 0;
    int rx_id = 0;
    double loss_db = 0.0;

    friend bool operator==(const RankedPair&, const RankedPair&) = default;
};

/// Measurement results sorted ascending by loss, ties by (tx_id, rx_id).
struct PairRanking {
    std::vector<RankedPair> entries;
    int usable_count = 0;  // entries with loss + margin within the budget

    const RankedPair& best() const;
    int count_within_of_best(double window_db) const;
};

/// Source of ground-truth pair losses for a sweep. `loss_db` may throw to
/// model a mid-sweep failure.
struct MapSource {
    std::vector<int> tx_ids;
    std::vector<int> rx_ids;
    double distance_m = 0.0;
    std::function<double(int tx_id, int rx_id)> loss_db;
};

struct SoundingSession {
    CouplingMap map;       // measured (noisy) losses
    PairRanking ranking;
    std::vector<SoundingMessage> trace;
    bool complete = false;
};

/// Sweep every pair once (outer loop TX, inner loop RX), one Report per pair;
/// each measurement adds Gaussian noise in the dB domain. Deterministic for a
/// given seed. An oracle failure aborts the session: the partial map is
/// flagged incomplete and the ranking left empty.
SoundingSession run_sounding(const MapSource& source, const SoundingConfig& cfg,
                             std::uint64_t seed);

PairRanking rank_pairs(std::vector<RankedPair> measurements, const SoundingConfig& cfg);

/// The top-ranked pair. Throws on an empty ranking.
const RankedPair& select_pair(const PairRanking& ranking);

enum class FailoverAction { Stay, Switch, Resound };

struct FailoverDecision {
    FailoverAction action = FailoverAction::Stay;
    RankedPair target;  // valid when action == Switch
};

/// Policy on an observed power drop: below the trigger, stay; otherwise
/// switch to the best-ranked alternative that still clears the budget when
/// the drop is assumed to carry over; if none qualifies, re-sound.
FailoverDecision fading_failover(const PairRanking& ranking, const RankedPair& current,
                                 double observed_drop_db, const SoundingConfig& cfg);

/// JSON-lines, one message per line.
void trace_to_jsonl(std::ostream& os, const std::vector<SoundingMessage>& trace);

/// CSV of (tx_id, rx_id, loss_db).
void ranking_to_csv(std::ostream& os, const PairRanking& ranking);

}  // namespace fsoqkd
