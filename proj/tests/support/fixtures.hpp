#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "imputer/synthgen.hpp"

namespace fixture {

/// Short synthetic matches, generated once per test binary.
inline imputer::SynthConfig short_config(int matches = 2, double length = 1800.0) {
    imputer::SynthConfig c;
    c.n_matches = matches;
    c.match_length = length;
    c.folds = 1;
    c.test_size = 1;
    return c;
}

inline const imputer::Dataset& short_dataset() {
    static const imputer::Dataset ds = imputer::generate_dataset(short_config());
    return ds;
}

inline const imputer::MatchData& short_match() { return short_dataset().matches.front(); }

struct Ev {
    double t;
    int agent;
    double x, y;
    int period = 1;
};

/// Hand-built match: home attacks +x in the first half, roles from the default
/// formations, one tracking frame per event holding every agent at (50, 30).
inline imputer::MatchData make_match(const std::vector<Ev>& evs) {
    using namespace imputer;
    MatchData m;
    const auto home = default_home_formation();
    const auto away = default_away_formation();
    for (int n = 0; n < kNumAgents; ++n) {
        const Team team = n < kAgentsPerTeam ? Team::home : Team::away;
        const auto& f = team == Team::home ? home : away;
        m.roster.push_back({n, team, f[static_cast<std::size_t>(n % kAgentsPerTeam)].role, 90.0});
    }
    m.attack_direction[0] = {AttackDirection::positive_x, AttackDirection::negative_x};
    m.attack_direction[1] = {AttackDirection::negative_x, AttackDirection::positive_x};
    for (const Ev& e : evs) {
        Event ev;
        ev.t = e.t;
        ev.period = e.period;
        ev.agent_id = e.agent;
        ev.team = m.roster[static_cast<std::size_t>(e.agent)].team;
        ev.x = e.x;
        ev.y = e.y;
        m.events.push_back(ev);
        TrackingFrame f;
        f.t = e.t;
        for (auto& p : f.positions) p = {50.0, 30.0};
        m.tracking.push_back(f);
    }
    return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    std::random_device rd;
    const auto dir = std::filesystem::temp_directory_path() / ("imputer_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixture
