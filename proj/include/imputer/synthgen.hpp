#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "imputer/domain.hpp"

namespace imputer {

struct RoleAnchor {
    Role role = Role::goalkeeper;
    Point anchor;  // own-goal frame, metres
};

using Formation = std::array<RoleAnchor, kAgentsPerTeam>;

Formation default_home_formation();
Formation default_away_formation();

struct SynthConfig {
    int n_matches = 10;
    double match_length = 2.0 * kHalfLength;  // seconds
    double tracking_hz = 10.0;
    double mean_event_gap = 1.5;  // seconds
    std::array<Formation, 2> formation{default_home_formation(), default_away_formation()};
    double noise_scale = 4.0;  // stationary std of each agent's personal drift, metres
    std::uint64_t seed = 7;

    // dynamics
    double ball_attraction = 0.4;
    double possession_push = 25.0;   // metres per unit attraction
    double drift_time_constant = 30.0;
    double move_time_constant = 1.5;
    double ball_smoothing = 4.0;
    double max_speed = 9.0;          // m/s
    double quick_gap_fraction = 0.3; // share of gaps drawn from [0.2, 1.0)
    double set_piece_probability = 0.3;
    double goal_probability = 0.12;

    // dataset split
    int folds = 5;
    int test_size = 2;

    /// Throws std::invalid_argument on a degenerate configuration.
    void validate() const;
};

struct Fold {
    std::vector<int> train;
    std::vector<int> test;
};

struct Dataset {
    std::vector<MatchData> matches;
    std::vector<Fold> folds;
};

MatchData generate_match(const SynthConfig& config, int match_index);

std::vector<Fold> make_folds(int n_matches, int folds, int test_size);

Dataset generate_dataset(const SynthConfig& config);

}  // namespace imputer
