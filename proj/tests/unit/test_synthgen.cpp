#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "imputer/apps.hpp"
#include "imputer/synthgen.hpp"

using namespace imputer;

TEST_CASE("generation is deterministic") {
    const SynthConfig c = fixture::short_config(1, 1200.0);
    const MatchData a = generate_match(c, 3);
    const MatchData b = generate_match(c, 3);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].t == b.events[i].t);
        CHECK(a.events[i].location() == b.events[i].location());
        CHECK(a.events[i].agent_id == b.events[i].agent_id);
    }
    REQUIRE(a.tracking.size() == b.tracking.size());
    for (std::size_t f = 0; f < a.tracking.size(); f += 97) CHECK(a.tracking[f].positions == b.tracking[f].positions);
}

TEST_CASE("synthetic match invariants") {
    const MatchData& m = fixture::short_match();
    CHECK_NOTHROW(m.validate());
    const SynthConfig c = fixture::short_config();
    CHECK(m.tracking.size() == static_cast<std::size_t>(std::llround(c.match_length * c.tracking_hz)));
    for (std::size_t i = 1; i < m.events.size(); ++i) {
        const double gap = m.events[i].t - m.events[i - 1].t;
        CHECK(gap > 0.0);
        CHECK(gap <= 20.0 + 1e-9);
    }
    for (const TrackingFrame& f : m.tracking) {
        for (const Point& p : f.positions) CHECK(on_pitch(p));
    }
    // the on-ball agent sits exactly at the event location in the event's frame
    for (std::size_t i = 0; i < m.events.size(); ++i) {
        const Event& e = m.events[i];
        const auto& frame = m.tracking[nearest_frame(m.tracking, e.t)];
        CHECK(frame.positions[static_cast<std::size_t>(e.agent_id)] == e.location());
    }
    int keepers[2] = {0, 0};
    for (const RosterEntry& r : m.roster) keepers[static_cast<int>(r.team)] += r.role == Role::goalkeeper;
    CHECK(keepers[0] == 1);
    CHECK(keepers[1] == 1);
}

TEST_CASE("quick events are a sizeable share") {
    const MatchData& m = fixture::short_match();
    std::size_t quick = 0;
    for (std::size_t i = 1; i < m.events.size(); ++i) quick += (m.events[i].t - m.events[i - 1].t) < 1.0;
    const double share = static_cast<double>(quick) / static_cast<double>(m.events.size() - 1);
    CHECK(share > 0.25);
    CHECK(share < 0.35);
}

TEST_CASE("collapsed dynamics hold agents at their anchors") {
    SynthConfig c = fixture::short_config(1, 1200.0);
    c.noise_scale = 0.0;
    c.ball_attraction = 0.0;
    const MatchData m = generate_match(c, 0);
    for (std::size_t f = 0; f < m.tracking.size(); ++f) {
        const int period = m.tracking[f].t < m.period_start[1] ? 1 : 2;
        for (int n = 0; n < kNumAgents; ++n) {
            const Team team = m.roster[static_cast<std::size_t>(n)].team;
            const Point anchor = c.formation[static_cast<std::size_t>(team)][static_cast<std::size_t>(n % kAgentsPerTeam)].anchor;
            const Point expected = from_own_goal_frame(anchor, m.direction(team, period));
            CHECK(m.tracking[f].positions[static_cast<std::size_t>(n)] == expected);
        }
    }
}

TEST_CASE("default dataset distances are in a plausible range") {
    const MatchData& m = fixture::short_match();
    for (const PlayerDistance& d : distance_covered(m)) {
        CHECK(d.km_per90 >= 3.0);
        CHECK(d.km_per90 <= 13.0);
    }
}

TEST_CASE("folds have disjoint test sets") {
    const auto folds = make_folds(10, 5, 2);
    REQUIRE(folds.size() == 5);
    CHECK(folds[0].test == std::vector<int>{0, 1});
    CHECK(folds[1].test == std::vector<int>{2, 3});
    std::set<int> seen;
    for (const Fold& f : folds) {
        CHECK(f.train.size() == 8);
        for (int m : f.test) CHECK(seen.insert(m).second);
        for (int m : f.train) CHECK(std::find(f.test.begin(), f.test.end(), m) == f.test.end());
    }
    const auto big = make_folds(34, 5, 3);
    CHECK(big[0].train.size() == 31);
    CHECK(std::abs(31.0 / 34.0 - 0.912) < 1e-3);
    CHECK_THROWS_AS(make_folds(9, 5, 2), std::invalid_argument);
}

TEST_CASE("degenerate configurations are rejected") {
    SynthConfig c;
    c.match_length = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SynthConfig{};
    c.tracking_hz = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SynthConfig{};
    c.formation[0][0].role = Role::center_back;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
