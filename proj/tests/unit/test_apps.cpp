#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "imputer/apps.hpp"
#include "imputer/rng.hpp"
#include "oracles.hpp"

using namespace imputer;

namespace {

AgentPositions random_positions(Rng& rng) {
    AgentPositions p;
    for (Point& q : p) q = {rng.uniform(0, kPitchLength), rng.uniform(0, kPitchWidth)};
    return p;
}

}  // namespace

TEST_CASE("rapid events are merged against the last kept event") {
    const std::vector<double> t = {0.0, 0.5, 2.0};
    CHECK(merge_indices(t, 1.0) == std::vector<std::size_t>{0, 2});
    const std::vector<double> chain = {0.0, 0.6, 1.2, 1.8, 2.4};
    CHECK(merge_indices(chain, 1.0) == std::vector<std::size_t>{0, 2, 4});
    CHECK(merge_indices(std::vector<double>{}, 1.0).empty());

    Rng rng(3);
    std::vector<double> times;
    double clock = 0.0;
    for (int i = 0; i < 5000; ++i) {
        clock += rng.exponential(0.8);
        times.push_back(clock);
    }
    for (const double th : {0.25, 1.0, 2.0}) CHECK(merge_indices(times, th) == oracle::merge_two_pointer(times, th));
}

TEST_CASE("merged prediction sets keep aligned rows") {
    const MatchData& m = fixture::short_match();
    const PredictionSet full = PredictionSet::skeleton(m);
    const PredictionSet merged = merge_rapid_events(full, 1.0);
    CHECK(merged.size() < full.size());
    CHECK(merged.phi_hat.size() == merged.size());
    CHECK(merged.observed_agent.size() == merged.size());
    for (std::size_t i = 1; i < merged.size(); ++i) CHECK(merged.t[i] - merged.t[i - 1] >= 1.0);
}

TEST_CASE("distance covered") {
    MatchData m = fixture::make_match({{0.0, 0, 0, 0}, {10.0, 0, 0, 0}, {20.0, 0, 0, 0}});
    std::vector<AgentPositions> pos(3);
    for (auto& row : pos) row.fill({10.0, 10.0});
    pos[1][4] = {40.0, 50.0};
    pos[2][4] = {40.0, 50.0};
    const std::vector<int> periods = {1, 1, 1};
    const auto d = distance_covered(pos, periods, m.roster);
    REQUIRE(d.size() == kNumAgents);
    CHECK(d[4].km == doctest::Approx(0.05));
    CHECK(d[4].km_per90 == doctest::Approx(0.05));
    CHECK(d[3].km == 0.0);

    // jumps across the half-time boundary do not count
    const std::vector<int> split = {1, 2, 2};
    CHECK(distance_covered(pos, split, m.roster)[4].km == 0.0);

    m.roster[4].minutes_played = 45.0;
    const auto half = distance_covered(pos, periods, m.roster);
    CHECK(half[4].km_per90 == doctest::Approx(0.1));
    m.roster[4].minutes_played = 10.0;
    CHECK_FALSE(distance_covered(pos, periods, m.roster)[4].included);
    CHECK_THROWS(distance_covered(pos, std::vector<int>{1, 1}, m.roster));
}

TEST_CASE("ground-truth distance from tracking") {
    const MatchData& m = fixture::short_match();
    const auto d = distance_covered(m);
    REQUIRE(d.size() == kNumAgents);
    for (const PlayerDistance& p : d) {
        CHECK(p.km > 0.0);
        CHECK(p.included);
    }
}

TEST_CASE("pitch control symmetric and limiting cases") {
    const MatchData m = fixture::make_match({{0.0, 0, 0, 0}});
    AgentPositions together;
    together.fill({52.5, 34.0});
    const PitchGrid g = pitch_control(together, m.roster, Team::home);
    CHECK(g.nx == 52);
    CHECK(g.ny == 34);
    for (const double v : g.cells) CHECK(v == 0.5);

    AgentPositions apart;
    for (int n = 0; n < kNumAgents; ++n) apart[static_cast<std::size_t>(n)] = n < kAgentsPerTeam ? Point{1, 1} : Point{104, 67};
    const PitchGrid far = pitch_control(apart, m.roster, Team::home);
    CHECK(far.at(51, 33) < 0.01);
    CHECK(far.at(0, 0) > 0.99);
}

TEST_CASE("pitch control per cell, bounds and team complement") {
    const MatchData m = fixture::make_match({{0.0, 0, 0, 0}});
    Rng rng(41);
    const PitchControlParams params;
    for (int trial = 0; trial < 5; ++trial) {
        const AgentPositions pos = random_positions(rng);
        const PitchGrid home = pitch_control(pos, m.roster, Team::home, params);
        const PitchGrid away = pitch_control(pos, m.roster, Team::away, params);
        double worst_oracle = 0.0, worst_complement = 0.0;
        for (int iy = 0; iy < home.ny; ++iy) {
            for (int ix = 0; ix < home.nx; ++ix) {
                const double v = home.at(ix, iy);
                CHECK((v >= 0.0 && v <= 1.0));
                worst_oracle = std::max(worst_oracle,
                                        std::abs(v - oracle::pitch_cell(pos, m, Team::home, home.centre(ix, iy), params)));
                worst_complement = std::max(worst_complement, std::abs(v + away.at(ix, iy) - 1.0));
            }
        }
        CHECK(worst_oracle < 1e-12);
        CHECK(worst_complement < 1e-12);
    }
}

TEST_CASE("pitch control errors between predictions and tracking") {
    const MatchData& m = fixture::short_match();
    PredictionSet exact = PredictionSet::skeleton(m);
    exact.phi_hat = align_events_to_tracking(m.events, m.tracking);
    const auto zero = pitch_control_errors(exact, m, {}, 50);
    CHECK(zero.size() == (m.events.size() + 49) / 50);
    for (const double e : zero) CHECK(e < 1e-12);

    PredictionSet centre = PredictionSet::skeleton(m);
    for (auto& row : centre.phi_hat) row.fill({52.5, 34.0});
    const auto off = pitch_control_errors(centre, m, {}, 50);
    double mean = 0.0;
    for (const double e : off) mean += e;
    CHECK(mean / static_cast<double>(off.size()) > 0.01);

    std::vector<PitchGrid> a(1), b(1);
    a[0].cells = {0.0, 1.0};
    b[0].cells = {0.5, 0.5};
    CHECK(pitch_control_mae(a, b) == 0.5);
}

TEST_CASE("heatmaps") {
    const std::vector<Point> pts = {{10, 10}, {20, 30}, {90, 60}};
    const std::vector<AttackDirection> dirs(3, AttackDirection::positive_x);
    const Heatmap h = heatmap(pts, dirs);
    double total = 0.0;
    for (const double v : h.density) {
        CHECK(v >= 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bhattacharyya(h, h) == doctest::Approx(1.0).epsilon(1e-12));
    const Heatmap u = uniform_heatmap();
    CHECK(bhattacharyya(u, u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bhattacharyya(h, u) < 1.0);

    // the same play seen from the other end maps to the same own-goal density
    std::vector<Point> mirrored;
    for (const Point& p : pts) mirrored.push_back({kPitchLength - p.x, kPitchWidth - p.y});
    const Heatmap hm = heatmap(mirrored, std::vector<AttackDirection>(3, AttackDirection::negative_x));
    CHECK(bhattacharyya(h, hm) == doctest::Approx(1.0).epsilon(1e-9));

    HeatmapParams sharp;
    sharp.sigma = 0.0;
    const Heatmap a = heatmap(std::vector<Point>{{10, 10}}, std::vector<AttackDirection>{AttackDirection::positive_x}, sharp);
    const Heatmap b = heatmap(std::vector<Point>{{80, 50}}, std::vector<AttackDirection>{AttackDirection::positive_x}, sharp);
    CHECK(bhattacharyya(a, b) == 0.0);

    const std::string pgm = heatmap_pgm(h);
    CHECK(pgm.rfind("P5\n105 68\n255\n", 0) == 0);
    CHECK(pgm.size() == std::string("P5\n105 68\n255\n").size() + 105 * 68);
    CHECK_THROWS(heatmap(std::vector<Point>{}, std::vector<AttackDirection>{}));
}

TEST_CASE("agent tracks") {
    const MatchData& m = fixture::short_match();
    const PredictionSet p = PredictionSet::skeleton(m);
    const AgentTrack a = agent_track(p, m, 3);
    CHECK(a.positions.size() == m.events.size());
    CHECK(a.directions.size() == m.events.size());
    const AgentTrack t = agent_track_truth(m, 3);
    CHECK(t.positions.size() == m.tracking.size());
}
