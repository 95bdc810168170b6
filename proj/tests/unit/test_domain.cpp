#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "imputer/domain.hpp"
#include "imputer/rng.hpp"

using namespace imputer;

namespace {

RosterEntry entry(int id) {
    return {id, id < kAgentsPerTeam ? Team::home : Team::away, Role::center_back, 90.0};
}

std::vector<RosterEntry> full_roster() {
    std::vector<RosterEntry> r;
    for (int i = 0; i < kNumAgents; ++i) r.push_back(entry(i));
    return r;
}

TrackingFrame frame_at(double t, double x) {
    TrackingFrame f;
    f.t = t;
    for (auto& p : f.positions) p = {x, 1.0};
    return f;
}

}  // namespace

TEST_CASE("observation mask marks the acting agent") {
    const auto roster = full_roster();
    std::vector<Event> events(1);
    events[0].agent_id = 5;
    const ObservationMask m = build_observation_mask(events, roster);
    for (std::size_t n = 0; n < kNumAgents; ++n) CHECK(m(0, n) == (n == 5 ? 1 : 0));

    std::vector<Event> three(3);
    const ObservationMask z = build_observation_mask(three, roster);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(z(t, 0) == 1);
        for (std::size_t n = 1; n < kNumAgents; ++n) CHECK(z(t, n) == 0);
    }
}

TEST_CASE("observation mask rejects unknown agents") {
    const auto roster = full_roster();
    std::vector<Event> events(1);
    events[0].agent_id = 40;
    CHECK_THROWS_AS(build_observation_mask(events, roster), DataError);
}

TEST_CASE("mask rows sum to one on a synthetic match") {
    const MatchData& m = fixture::short_match();
    const ObservationMask mask = build_observation_mask(m.events, m.roster);
    long total = 0;
    for (std::size_t t = 0; t < mask.rows(); ++t) {
        int row = 0;
        for (std::size_t n = 0; n < kNumAgents; ++n) row += mask(t, n);
        CHECK(row == 1);
        CHECK(mask(t, static_cast<std::size_t>(m.events[t].agent_id)) == 1);
        total += row;
    }
    CHECK(total == static_cast<long>(m.events.size()));
}

TEST_CASE("nearest frame breaks ties toward the earlier frame") {
    const std::vector<TrackingFrame> frames = {frame_at(9.97, 1.0), frame_at(10.03, 2.0)};
    CHECK(nearest_frame(frames, 10.00) == 0);
    CHECK(nearest_frame(frames, 10.03) == 1);
    CHECK(nearest_frame(frames, 10.01) == 1);
    CHECK(nearest_frame(frames, -5.0) == 0);
    CHECK(nearest_frame(frames, 99.0) == 1);
    CHECK_THROWS_AS(nearest_frame(std::vector<TrackingFrame>{}, 1.0), DataError);
}

TEST_CASE("alignment agrees with a linear nearest-frame scan") {
    const MatchData& m = fixture::short_match();
    const auto aligned = align_events_to_tracking(m.events, m.tracking);
    REQUIRE(aligned.size() == m.events.size());
    for (std::size_t t = 0; t < m.events.size(); t += 7) {
        std::size_t best = 0;
        for (std::size_t f = 1; f < m.tracking.size(); ++f) {
            if (std::abs(m.tracking[f].t - m.events[t].t) < std::abs(m.tracking[best].t - m.events[t].t) - 1e-9) best = f;
        }
        CHECK(aligned[t] == m.tracking[best].positions);
    }
}

TEST_CASE("own-goal frame is a point reflection for -x") {
    CHECK(to_own_goal_frame({30, 20}, AttackDirection::positive_x) == Point{30, 20});
    CHECK(to_own_goal_frame({30, 20}, AttackDirection::negative_x) == Point{75, 48});
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Point p{rng.uniform(0, kPitchLength), rng.uniform(0, kPitchWidth)};
        for (const auto d : {AttackDirection::positive_x, AttackDirection::negative_x}) {
            const Point q = from_own_goal_frame(to_own_goal_frame(p, d), d);
            CHECK(std::abs(q.x - p.x) < 1e-12);
            CHECK(std::abs(q.y - p.y) < 1e-12);
        }
    }
}

TEST_CASE("names round-trip") {
    for (int i = 0; i < kNumEventTypes; ++i) {
        const auto e = static_cast<EventType>(i);
        CHECK(parse_event_type(event_type_name(e)) == e);
    }
    for (int i = 0; i < kNumRoles; ++i) {
        const auto r = static_cast<Role>(i);
        CHECK(parse_role(role_name(r)) == r);
    }
    CHECK(parse_team("home") == Team::home);
    CHECK(parse_direction(direction_name(AttackDirection::negative_x)) == AttackDirection::negative_x);
    CHECK_THROWS(parse_role("Sweeper Keeper"));
}

TEST_CASE("role groups follow the 16 to 7 grouping") {
    CHECK(role_group(parse_role("Left Wing Back")) == RoleGroup::wide_defender);
    CHECK(role_group(parse_role("Central Defensive Midfielder")) == RoleGroup::central_defender);
    CHECK(role_group(parse_role("Central Attacking Midfielder")) == RoleGroup::central_attacker);
    CHECK(role_group(parse_role("Left Forward")) == RoleGroup::wide_attacker);
    CHECK(role_group(parse_role("Right Midfielder")) == RoleGroup::wide_midfielder);
    CHECK(role_group(parse_role("Goalkeeper")) == RoleGroup::goalkeeper);
    std::array<int, kNumRoleGroups> sizes{};
    for (int i = 0; i < kNumRoles; ++i) ++sizes[static_cast<std::size_t>(role_group(static_cast<Role>(i)))];
    CHECK(sizes == std::array<int, kNumRoleGroups>{1, 2, 4, 1, 2, 2, 4});
}

TEST_CASE("resolved predictions use observed locations") {
    const MatchData& m = fixture::short_match();
    PredictionSet set = PredictionSet::skeleton(m);
    const auto rows = set.resolved();
    for (std::size_t t = 0; t < set.size(); ++t) {
        CHECK(rows[t][static_cast<std::size_t>(m.events[t].agent_id)] == m.events[t].location());
    }
}

TEST_CASE("match clock restarts the second half at 45 minutes") {
    MatchData m;
    m.period_start = {0.0, 2800.0};
    CHECK(m.match_clock(100.0, 1) == 100.0);
    CHECK(m.match_clock(2800.0, 2) == 2700.0);
    CHECK(m.match_clock(2900.0, 2) == 2800.0);
}
