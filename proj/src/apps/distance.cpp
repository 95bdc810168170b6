#include <cmath>
#include <stdexcept>

#include "imputer/apps.hpp"

namespace imputer {

std::vector<std::size_t> merge_indices(std::span<const double> times, double threshold) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (kept.empty() || times[i] - times[kept.back()] >= threshold) kept.push_back(i);
    }
    return kept;
}

PredictionSet merge_rapid_events(const PredictionSet& set, double threshold) {
    PredictionSet out;
    out.match_id = set.match_id;
    for (const std::size_t i : merge_indices(set.t, threshold)) {
        out.t.push_back(set.t[i]);
        out.period.push_back(set.period[i]);
        out.phi_hat.push_back(set.phi_hat[i]);
        out.observed_agent.push_back(set.observed_agent[i]);
        out.observed_location.push_back(set.observed_location[i]);
    }
    return out;
}

std::vector<PlayerDistance> distance_covered(std::span<const AgentPositions> positions, std::span<const int> periods,
                                             std::span<const RosterEntry> roster) {
    if (positions.size() != periods.size()) throw std::invalid_argument("distance_covered: size mismatch");
    std::vector<PlayerDistance> out;
    for (const RosterEntry& r : roster) {
        PlayerDistance d;
        d.agent_id = r.agent_id;
        d.role = r.role;
        d.minutes_played = r.minutes_played;
        const auto k = static_cast<std::size_t>(r.agent_id);
        double metres = 0.0;
        for (std::size_t i = 1; i < positions.size(); ++i) {
            if (periods[i] != periods[i - 1]) continue;
            metres += std::hypot(positions[i][k].x - positions[i - 1][k].x, positions[i][k].y - positions[i - 1][k].y);
        }
        d.km = metres / 1000.0;
        d.included = r.minutes_played >= kMinMinutesForDistance;
        d.km_per90 = r.minutes_played > 0.0 ? d.km * 90.0 / r.minutes_played : 0.0;
        out.push_back(d);
    }
    return out;
}

std::vector<PlayerDistance> distance_covered(const PredictionSet& set, std::span<const RosterEntry> roster) {
    return distance_covered(set.resolved(), set.period, roster);
}

std::vector<PlayerDistance> distance_covered(const MatchData& match) {
    std::vector<AgentPositions> positions;
    std::vector<int> periods;
    positions.reserve(match.tracking.size());
    periods.reserve(match.tracking.size());
    for (const TrackingFrame& f : match.tracking) {
        positions.push_back(f.positions);
        periods.push_back(f.t < match.period_start[1] ? 1 : 2);
    }
    return distance_covered(positions, periods, match.roster);
}

}  // namespace imputer
