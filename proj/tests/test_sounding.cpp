#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fsoqkd/rng.hpp"
#include "fsoqkd/sounding.hpp"

using namespace fsoqkd;

namespace {

SoundingConfig quiet_config() {
    SoundingConfig cfg;
    cfg.power_meter_noise_db = 0.0;
    return cfg;
}

MapSource synthetic_source(std::vector<int> tx_ids, std::vector<int> rx_ids,
                           std::function<double(int, int)> fn) {
    MapSource src;
    src.tx_ids = std::move(tx_ids);
    src.rx_ids = std::move(rx_ids);
    src.distance_m = 6.0;
    src.loss_db = std::move(fn);
    return src;
}

}  // namespace

TEST_CASE("sweep visits every pair exactly once and frames the session") {
    const auto src = synthetic_source({1, 2, 3}, {10, 11},
                                      [](int t, int r) { return 10.0 + t + 0.1 * r; });
    const auto session = run_sounding(src, quiet_config(), 5);
    REQUIRE(session.complete);

    std::map<std::pair<int, int>, int> report_count;
    int begins = 0, ends = 0, reports = 0;
    int last_seq = 0;
    for (const auto& m : session.trace) {
        CHECK(m.sequence > last_seq);
        last_seq = m.sequence;
        if (m.kind == MessageKind::BeginSound) ++begins;
        if (m.kind == MessageKind::EndSound) ++ends;
        if (m.kind == MessageKind::Report) {
            ++reports;
            ++report_count[{m.tx_id, m.rx_id}];
        }
    }
    CHECK(begins == 1);
    CHECK(ends == 1);
    CHECK(reports == 6);
    for (const auto& [pair, n] : report_count) CHECK(n == 1);

    // Timestamps advance by one dwell per measurement.
    CHECK(session.trace.back().timestamp_s ==
          doctest::Approx(6 * quiet_config().dwell_time_s).epsilon(1e-12));
}

TEST_CASE("noiseless sounding finds the true argmin") {
    const auto src = synthetic_source({1, 2, 3, 4}, {7, 8, 9}, [](int t, int r) {
        if (t == 3 && r == 8) return 4.5;
        return 20.0 + t + r;
    });
    const auto session = run_sounding(src, quiet_config(), 9);
    CHECK(session.ranking.best().tx_id == 3);
    CHECK(session.ranking.best().rx_id == 8);
    CHECK(session.ranking.best().loss_db == doctest::Approx(4.5));
}

TEST_CASE("same seed replays a bit-identical trace") {
    SoundingConfig cfg;
    cfg.power_meter_noise_db = 0.3;
    const auto src = synthetic_source({1, 2}, {5, 6}, [](int t, int r) { return 12.0 + t + r; });
    std::ostringstream a, b;
    trace_to_jsonl(a, run_sounding(src, cfg, 1234).trace);
    trace_to_jsonl(b, run_sounding(src, cfg, 1234).trace);
    CHECK(a.str() == b.str());
    std::ostringstream c;
    trace_to_jsonl(c, run_sounding(src, cfg, 1235).trace);
    CHECK(a.str() != c.str());
}

TEST_CASE("ranking is a sorted permutation of the measurements") {
    SoundingConfig cfg;
    cfg.power_meter_noise_db = 0.5;
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        std::map<std::pair<int, int>, double> truth;
        for (int t = 1; t <= 5; ++t)
            for (int r = 1; r <= 7; ++r)
                truth[{t, r}] = 10.0 + 8.0 * rng.uniform();
        const auto src = synthetic_source({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5, 6, 7},
                                          [&](int t, int r) { return truth.at({t, r}); });
        const auto session = run_sounding(src, cfg, 100 + static_cast<std::uint64_t>(trial));
        REQUIRE(session.ranking.entries.size() == truth.size());

        std::map<std::pair<int, int>, int> seen;
        for (std::size_t i = 0; i < session.ranking.entries.size(); ++i) {
            const auto& e = session.ranking.entries[i];
            ++seen[{e.tx_id, e.rx_id}];
            if (i > 0) {
                const auto& p = session.ranking.entries[i - 1];
                const bool ordered =
                    p.loss_db < e.loss_db ||
                    (p.loss_db == e.loss_db &&
                     (p.tx_id < e.tx_id || (p.tx_id == e.tx_id && p.rx_id < e.rx_id)));
                CHECK(ordered);
            }
        }
        CHECK(seen.size() == truth.size());
    }
}

TEST_CASE("equal losses rank by lexicographic pair order") {
    std::vector<RankedPair> measured = {{3, 1, 7.0}, {2, 9, 7.0}, {2, 4, 7.0}, {5, 5, 6.0}};
    const PairRanking ranking = rank_pairs(measured, quiet_config());
    CHECK(ranking.entries[0] == RankedPair{5, 5, 6.0});
    CHECK(ranking.entries[1] == RankedPair{2, 4, 7.0});
    CHECK(ranking.entries[2] == RankedPair{2, 9, 7.0});
    CHECK(ranking.entries[3] == RankedPair{3, 1, 7.0});
}

TEST_CASE("select_pair") {
    PairRanking single;
    single.entries = {{4, 2, 9.0}};
    CHECK(select_pair(single) == RankedPair{4, 2, 9.0});

    PairRanking tie = rank_pairs({{2, 2, 5.0}, {1, 3, 5.0}}, quiet_config());
    CHECK(select_pair(tie) == RankedPair{1, 3, 5.0});

    PairRanking empty;
    CHECK_THROWS_AS((void)select_pair(empty), std::invalid_argument);
}

TEST_CASE("usable pairs count against the loss budget") {
    SoundingConfig cfg = quiet_config();
    cfg.budget_threshold_db = 26.0;
    cfg.margin_db = 1.0;
    const PairRanking ranking =
        rank_pairs({{1, 1, 15.5}, {1, 2, 24.9}, {1, 3, 25.5}, {2, 1, 40.0}}, cfg);
    CHECK(ranking.usable_count == 2);  // 15.5 and 24.9 clear 26 - 1 dB
    CHECK(ranking.count_within_of_best(3.0) == 0);
    CHECK(ranking.count_within_of_best(10.0) == 2);
}

TEST_CASE("fading failover policy") {
    SoundingConfig cfg = quiet_config();
    cfg.fade_trigger_db = 3.0;
    cfg.budget_threshold_db = 26.0;
    const PairRanking ranking =
        rank_pairs({{1, 1, 15.5}, {1, 2, 18.0}, {2, 2, 24.0}}, cfg);
    const RankedPair current{1, 1, 15.5};

    CHECK(fading_failover(ranking, current, 0.0, cfg).action == FailoverAction::Stay);
    CHECK(fading_failover(ranking, current, 2.9, cfg).action == FailoverAction::Stay);

    // A 5 dB drop still leaves the second pair within budget.
    const auto sw = fading_failover(ranking, current, 5.0, cfg);
    CHECK(sw.action == FailoverAction::Switch);
    CHECK(sw.target == RankedPair{1, 2, 18.0});

    // A 9 dB drop exhausts every alternative.
    CHECK(fading_failover(ranking, current, 9.0, cfg).action == FailoverAction::Resound);

    CHECK_THROWS_AS((void)fading_failover(ranking, RankedPair{9, 9, 1.0}, 5.0, cfg),
                    std::invalid_argument);
}

TEST_CASE("oracle failure mid-sweep aborts with a flagged partial session") {
    int calls = 0;
    const auto src = synthetic_source({1, 2}, {1, 2}, [&](int, int) -> double {
        if (++calls == 3) throw std::runtime_error("meter offline");
        return 10.0;
    });
    const auto session = run_sounding(src, quiet_config(), 3);
    CHECK(!session.complete);
    CHECK(session.ranking.entries.empty());
    bool has_nack = false;
    for (const auto& m : session.trace)
        if (m.kind == MessageKind::Nack) has_nack = true;
    CHECK(has_nack);
    CHECK(std::isnan(session.map.loss_db(1, 1)));
}

TEST_CASE("ranking CSV format") {
    const PairRanking ranking = rank_pairs({{1, 2, 15.456789}}, quiet_config());
    std::ostringstream os;
    ranking_to_csv(os, ranking);
    CHECK(os.str() == "tx_id,rx_id,loss_db\n1,2,15.457\n");
}
