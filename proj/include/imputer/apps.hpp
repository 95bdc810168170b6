#pragma once

#include <span>
#include <string>
#include <vector>

#include "imputer/domain.hpp"

namespace imputer {

// ---- event merging and distance covered ------------------------------------------

/// Indices kept when an event closer than `threshold` seconds to the last kept
/// event is dropped.
std::vector<std::size_t> merge_indices(std::span<const double> times, double threshold = 1.0);

PredictionSet merge_rapid_events(const PredictionSet& set, double threshold = 1.0);

struct PlayerDistance {
    int agent_id = 0;
    Role role = Role::goalkeeper;
    double minutes_played = 0.0;
    double km = 0.0;         // raw path length
    double km_per90 = 0.0;   // normalized to 90 minutes
    bool included = false;   // false for players under the minutes threshold
};

inline constexpr double kMinMinutesForDistance = 20.0;

/// Path length per agent over successive samples; jumps across a period
/// boundary are not counted.
std::vector<PlayerDistance> distance_covered(std::span<const AgentPositions> positions, std::span<const int> periods,
                                             std::span<const RosterEntry> roster);

/// Convenience: distance over the resolved predictions (observed agents at the event location).
std::vector<PlayerDistance> distance_covered(const PredictionSet& set, std::span<const RosterEntry> roster);

/// Ground truth from every tracking frame.
std::vector<PlayerDistance> distance_covered(const MatchData& match);

// ---- pitch control ---------------------------------------------------------------

struct PitchControlParams {
    double reaction_time = 0.7;  // s
    double max_speed = 5.0;      // m/s
    double tau_scale = 0.45;     // s
    int nx = 52;
    int ny = 34;
};

/// Attacking-team control probability per cell, row-major [iy * nx + ix].
struct PitchGrid {
    int nx = 0;
    int ny = 0;
    std::vector<double> cells;

    double cell_width() const { return kPitchLength / nx; }
    double cell_height() const { return kPitchWidth / ny; }
    Point centre(int ix, int iy) const { return {(ix + 0.5) * cell_width(), (iy + 0.5) * cell_height()}; }
    double at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy * nx + ix)]; }
};

PitchGrid pitch_control(const AgentPositions& positions, std::span<const RosterEntry> roster, Team attacking,
                        const PitchControlParams& params = {});

/// Mean |P_pred - P_truth| over all cells of all grid pairs.
double pitch_control_mae(std::span<const PitchGrid> predicted, std::span<const PitchGrid> truth);

/// Per-event MAE between grids from the resolved predictions and from tracking,
/// using the event team as the attacking side. `stride` subsamples events.
std::vector<double> pitch_control_errors(const PredictionSet& set, const MatchData& match,
                                         const PitchControlParams& params = {}, std::size_t stride = 1);

// ---- heatmaps --------------------------------------------------------------------

struct HeatmapParams {
    int nx = 105;
    int ny = 68;
    double sigma = 2.0;     // metres
    double truncate = 3.0;  // kernel radius in sigmas
};

/// Density over the pitch, row-major [iy * nx + ix], summing to 1.
struct Heatmap {
    int nx = 0;
    int ny = 0;
    std::vector<double> density;
};

/// Positions are mapped into the player's own-goal frame (attacking towards +x).
Heatmap heatmap(std::span<const Point> positions, std::span<const AttackDirection> directions,
                const HeatmapParams& params = {});

Heatmap uniform_heatmap(const HeatmapParams& params = {});

double bhattacharyya(const Heatmap& a, const Heatmap& b);

/// Positions of one agent across a prediction set (resolved) with its directions.
struct AgentTrack {
    std::vector<Point> positions;
    std::vector<AttackDirection> directions;
};
AgentTrack agent_track(const PredictionSet& set, const MatchData& match, int agent_id);
AgentTrack agent_track_truth(const MatchData& match, int agent_id);

/// Binary greymap (P5); darker means denser.
std::string heatmap_pgm(const Heatmap& map);

}  // namespace imputer
