#include "fsoqkd/sounding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "fsoqkd/rng.hpp"

namespace fsoqkd {

void SoundingConfig::validate() const {
    if (dwell_time_s <= 0.0) throw std::invalid_argument("dwell time must be > 0");
    if (power_meter_noise_db < 0.0) throw std::invalid_argument("meter noise must be >= 0");
    if (resound_period_s <= 0.0) throw std::invalid_argument("resound period must be > 0");
    if (fade_trigger_db <= 0.0) throw std::invalid_argument("fade trigger must be > 0");
    if (margin_db < 0.0) throw std::invalid_argument("margin must be >= 0");
    if (budget_threshold_db <= 0.0) throw std::invalid_argument("budget threshold must be > 0");
}

const char* to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::BeginSound: return "BeginSound";
        case MessageKind::SetTx: return "SetTx";
        case MessageKind::SetRx: return "SetRx";
        case MessageKind::Report: return "Report";
        case MessageKind::EndSound: return "EndSound";
        case MessageKind::Ack: return "Ack";
        case MessageKind::Nack: return "Nack";
    }
    return "Unknown";
}

const RankedPair& PairRanking::best() const {
    if (entries.empty()) throw std::invalid_argument("ranking is empty");
    return entries.front();
}

int PairRanking::count_within_of_best(double window_db) const {
    if (entries.empty()) return 0;
    const double limit = entries.front().loss_db + window_db;
    int n = 0;
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].loss_db <= limit) ++n;
    return n;
}

PairRanking rank_pairs(std::vector<RankedPair> measurements, const SoundingConfig& cfg) {
    cfg.validate();
    std::sort(measurements.begin(), measurements.end(),
              [](const RankedPair& a, const RankedPair& b) {
                  if (a.loss_db != b.loss_db) return a.loss_db < b.loss_db;
                  if (a.tx_id != b.tx_id) return a.tx_id < b.tx_id;
                  return a.rx_id < b.rx_id;
              });
    PairRanking ranking;
    ranking.entries = std::move(measurements);
    const double usable_limit = cfg.budget_threshold_db - cfg.margin_db;
    ranking.usable_count = static_cast<int>(
        std::count_if(ranking.entries.begin(), ranking.entries.end(),
                      [&](const RankedPair& e) { return e.loss_db <= usable_limit; }));
    return ranking;
}

namespace {

class Session {
public:
    Session(const SoundingConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

    void emit(MessageKind kind, int tx = -1, int rx = -1, double power_dbm = 0.0) {
        trace_.push_back(SoundingMessage{kind, ++sequence_, clock_s_, tx, rx, power_dbm});
    }

    double measure(double true_loss_db) {
        clock_s_ += cfg_.dwell_time_s;
        // Floored at zero: the meter cannot report more power than the probe.
        return std::max(0.0, true_loss_db + rng_.normal(0.0, cfg_.power_meter_noise_db));
    }

    std::vector<SoundingMessage> take_trace() { return std::move(trace_); }

private:
    const SoundingConfig& cfg_;
    Rng rng_;
    std::vector<SoundingMessage> trace_;
    int sequence_ = 0;
    double clock_s_ = 0.0;
};

}  // namespace

SoundingSession run_sounding(const MapSource& source, const SoundingConfig& cfg,
                             std::uint64_t seed) {
    cfg.validate();
    if (source.tx_ids.empty() || source.rx_ids.empty())
        throw std::invalid_argument("sounding needs non-empty element subsets");
    if (!source.loss_db) throw std::invalid_argument("sounding needs a loss oracle");

    SoundingSession session;
    session.map.tx_ids = source.tx_ids;
    session.map.rx_ids = source.rx_ids;
    session.map.distance_m = source.distance_m;
    session.map.loss_db.setConstant(static_cast<Eigen::Index>(source.tx_ids.size()),
                                    static_cast<Eigen::Index>(source.rx_ids.size()),
                                    std::numeric_limits<double>::quiet_NaN());

    Session s(cfg, seed);
    std::vector<RankedPair> measurements;
    measurements.reserve(source.tx_ids.size() * source.rx_ids.size());

    s.emit(MessageKind::BeginSound);
    s.emit(MessageKind::Ack);
    for (std::size_t i = 0; i < source.tx_ids.size(); ++i) {
        const int tx = source.tx_ids[i];
        s.emit(MessageKind::SetTx, tx);
        s.emit(MessageKind::Ack, tx);
        for (std::size_t j = 0; j < source.rx_ids.size(); ++j) {
            const int rx = source.rx_ids[j];
            s.emit(MessageKind::SetRx, tx, rx);
            s.emit(MessageKind::Ack, tx, rx);
            double true_loss;
            try {
                true_loss = source.loss_db(tx, rx);
            } catch (const std::exception&) {
                s.emit(MessageKind::Nack, tx, rx);
                s.emit(MessageKind::EndSound);
                session.trace = s.take_trace();
                session.complete = false;
                return session;
            }
            const double measured = s.measure(true_loss);
            session.map.loss_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                measured;
            s.emit(MessageKind::Report, tx, rx, -measured);
            measurements.push_back(RankedPair{tx, rx, measured});
        }
    }
    s.emit(MessageKind::EndSound);
    s.emit(MessageKind::Ack);

    session.trace = s.take_trace();
    session.ranking = rank_pairs(std::move(measurements), cfg);
    session.complete = true;
    return session;
}

const RankedPair& select_pair(const PairRanking& ranking) { return ranking.best(); }

FailoverDecision fading_failover(const PairRanking& ranking, const RankedPair& current,
                                 double observed_drop_db, const SoundingConfig& cfg) {
    cfg.validate();
    const bool known = std::any_of(ranking.entries.begin(), ranking.entries.end(),
                                   [&](const RankedPair& e) {
                                       return e.tx_id == current.tx_id && e.rx_id == current.rx_id;
                                   });
    if (!known) throw std::invalid_argument("current pair is not in the ranking");

    if (observed_drop_db < cfg.fade_trigger_db) return {FailoverAction::Stay, current};

    // Assume the drop carries over to alternatives until the next sweep says
    // otherwise; qualify a fallback only if it still clears the budget.
    const double limit = cfg.budget_threshold_db - cfg.margin_db;
    for (const RankedPair& e : ranking.entries) {
        if (e.tx_id == current.tx_id && e.rx_id == current.rx_id) continue;
        if (e.loss_db + observed_drop_db <= limit) return {FailoverAction::Switch, e};
    }
    return {FailoverAction::Resound, current};
}

void trace_to_jsonl(std::ostream& os, const std::vector<SoundingMessage>& trace) {
    for (const SoundingMessage& m : trace) {
        nlohmann::json j;
        j["seq"] = m.sequence;
        j["t_s"] = m.timestamp_s;
        j["kind"] = to_string(m.kind);
        if (m.tx_id >= 0) j["tx_id"] = m.tx_id;
        if (m.rx_id >= 0) j["rx_id"] = m.rx_id;
        if (m.kind == MessageKind::Report) j["power_dbm"] = m.power_dbm;
        os << j.dump() << '\n';
    }
}

void ranking_to_csv(std::ostream& os, const PairRanking& ranking) {
    os << "tx_id,rx_id,loss_db\n";
    char cell[32];
    for (const RankedPair& e : ranking.entries) {
        std::snprintf(cell, sizeof cell, "%.3f", e.loss_db);
        os << e.tx_id << ',' << e.rx_id << ',' << cell << '\n';
    }
}

}  // namespace fsoqkd
