#include <string>

#include "imputer/models.hpp"

namespace imputer {

namespace {

struct Bracket {
    std::size_t prev;
    std::size_t next;
};

Bracket bracket(const MatchData& match, const ObservationIndex& index, std::size_t t, int n) {
    auto prev = index.prev(t, n);
    auto next = index.next(t, n);
    if (prev == ObservationIndex::kNone && next == ObservationIndex::kNone) {
        throw DataError("match " + std::to_string(match.match_id) + ": agent " + std::to_string(n) +
                        " has no observations");
    }
    if (prev == ObservationIndex::kNone) prev = next;
    if (next == ObservationIndex::kNone) next = prev;
    return {static_cast<std::size_t>(prev), static_cast<std::size_t>(next)};
}

Point to_absolute(const MatchData& match, std::size_t t, int n, Point own) {
    return from_own_goal_frame(own, match.direction_of_agent(n, match.events[t].period));
}

}  // namespace

Point baseline1_predict(const MatchData& match, const ObservationIndex& index, std::size_t t, int n) {
    if (index.first(n) == ObservationIndex::kNone) {
        throw DataError("match " + std::to_string(match.match_id) + ": agent " + std::to_string(n) +
                        " has no observations");
    }
    return to_absolute(match, t, n, index.mean_own_location(n));
}

Point baseline2_predict(const MatchData& match, const ObservationIndex& index, std::size_t t, int n) {
    const Bracket b = bracket(match, index, t, n);
    const Point p = index.own_location(b.prev, n);
    const Point q = index.own_location(b.next, n);
    return to_absolute(match, t, n, {0.5 * (p.x + q.x), 0.5 * (p.y + q.y)});
}

Point baseline3_predict(const MatchData& match, const ObservationIndex& index, std::size_t t, int n) {
    const Bracket b = bracket(match, index, t, n);
    const Point p = index.own_location(b.prev, n);
    const Point q = index.own_location(b.next, n);
    const double t0 = match.events[b.prev].t;
    const double t1 = match.events[b.next].t;
    const double lambda = t1 > t0 ? (match.events[t].t - t0) / (t1 - t0) : 0.0;
    return to_absolute(match, t, n, {p.x + lambda * (q.x - p.x), p.y + lambda * (q.y - p.y)});
}

Point baseline1_predict(const MatchData& match, const ObservationMask& mask, std::size_t t, int n) {
    return baseline1_predict(match, ObservationIndex(match, mask), t, n);
}

Point baseline2_predict(const MatchData& match, const ObservationMask& mask, std::size_t t, int n) {
    return baseline2_predict(match, ObservationIndex(match, mask), t, n);
}

Point baseline3_predict(const MatchData& match, const ObservationMask& mask, std::size_t t, int n) {
    return baseline3_predict(match, ObservationIndex(match, mask), t, n);
}

PredictionSet baseline_predict_match(ModelKind kind, const MatchData& match) {
    const ObservationMask mask = build_observation_mask(match.events, match.roster);
    const ObservationIndex index(match, mask);
    PredictionSet out = PredictionSet::skeleton(match);
    for (std::size_t t = 0; t < match.events.size(); ++t) {
        for (int n = 0; n < kNumAgents; ++n) {
            Point p;
            switch (kind) {
                case ModelKind::baseline1: p = baseline1_predict(match, index, t, n); break;
                case ModelKind::baseline2: p = baseline2_predict(match, index, t, n); break;
                case ModelKind::baseline3: p = baseline3_predict(match, index, t, n); break;
                default: throw std::invalid_argument("baseline_predict_match: not a baseline");
            }
            out.phi_hat[t][static_cast<std::size_t>(n)] = p;
        }
    }
    return out;
}

}  // namespace imputer
