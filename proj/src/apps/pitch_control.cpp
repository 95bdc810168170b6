#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "imputer/apps.hpp"

namespace imputer {

PitchGrid pitch_control(const AgentPositions& positions, std::span<const RosterEntry> roster, Team attacking,
                        const PitchControlParams& params) {
    if (params.nx < 1 || params.ny < 1) throw std::invalid_argument("pitch_control: empty grid");
    if (!(params.max_speed > 0.0) || !(params.tau_scale > 0.0)) {
        throw std::invalid_argument("pitch_control: speed and tau scale must be positive");
    }
    PitchGrid g;
    g.nx = params.nx;
    g.ny = params.ny;
    g.cells.resize(static_cast<std::size_t>(g.nx * g.ny));
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const Point c = g.centre(ix, iy);
            double att = std::numeric_limits<double>::infinity();
            double def = std::numeric_limits<double>::infinity();
            for (const RosterEntry& r : roster) {
                const Point p = positions[static_cast<std::size_t>(r.agent_id)];
                const double tau = params.reaction_time + std::sqrt((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y)) / params.max_speed;
                if (r.team == attacking) {
                    att = std::min(att, tau);
                } else {
                    def = std::min(def, tau);
                }
            }
            g.cells[static_cast<std::size_t>(iy * g.nx + ix)] = 1.0 / (1.0 + std::exp(-(def - att) / params.tau_scale));
        }
    }
    return g;
}

double pitch_control_mae(std::span<const PitchGrid> predicted, std::span<const PitchGrid> truth) {
    if (predicted.size() != truth.size() || predicted.empty()) {
        throw std::invalid_argument("pitch_control_mae: grid lists must be non-empty and equal length");
    }
    double total = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].cells.size() != truth[i].cells.size()) {
            throw std::invalid_argument("pitch_control_mae: grid shape mismatch");
        }
        for (std::size_t c = 0; c < truth[i].cells.size(); ++c) total += std::abs(predicted[i].cells[c] - truth[i].cells[c]);
        cells += truth[i].cells.size();
    }
    return total / static_cast<double>(cells);
}

std::vector<double> pitch_control_errors(const PredictionSet& set, const MatchData& match,
                                         const PitchControlParams& params, std::size_t stride) {
    if (set.size() != match.events.size()) throw DataError("pitch_control_errors: prediction rows do not match events");
    if (stride == 0) throw std::invalid_argument("pitch_control_errors: stride must be positive");
    const auto truth = align_events_to_tracking(match.events, match.tracking);
    const auto resolved = set.resolved();
    std::vector<double> out;
    for (std::size_t t = 0; t < set.size(); t += stride) {
        const Team attacking = match.events[t].team;
        const PitchGrid p = pitch_control(resolved[t], match.roster, attacking, params);
        const PitchGrid q = pitch_control(truth[t], match.roster, attacking, params);
        out.push_back(pitch_control_mae(std::span(&p, 1), std::span(&q, 1)));
    }
    return out;
}

}  // namespace imputer
