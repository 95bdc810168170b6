#include "imputer/domain.hpp"

#include <algorithm>
#include <cmath>

namespace imputer {

namespace {

constexpr std::array<std::string_view, kNumEventTypes> kEventTypeNames = {
    "Pass",          "Pass Received",     "Foul",          "Foul Won",
    "Duel",          "Tackle",            "Shot",          "Save",
    "Intervention",  "Recovery",          "Interception",  "Take-On",
    "Block",         "Ball Received",     "Clearance",     "Error",
    "Goal Conceded", "Offside",           "Aerial Clearance",
    "Pause",         "Own Goal",          "Control Under Pressure",
    "Deflection",    "Carry",             "Substitution",
};

constexpr std::array<std::string_view, kNumRoles> kRoleNames = {
    "Goalkeeper",
    "Center Back",
    "Central Defensive Midfielder",
    "Left Back",
    "Right Back",
    "Left Wing Back",
    "Right Wing Back",
    "Central Midfielder",
    "Left Midfielder",
    "Right Midfielder",
    "Central Attacking Midfielder",
    "Centre Forward",
    "Left Winger",
    "Right Winger",
    "Left Forward",
    "Right Forward",
};

constexpr std::array<RoleGroup, kNumRoles> kRoleGroups = {
    RoleGroup::goalkeeper,
    RoleGroup::central_defender,
    RoleGroup::central_defender,
    RoleGroup::wide_defender,
    RoleGroup::wide_defender,
    RoleGroup::wide_defender,
    RoleGroup::wide_defender,
    RoleGroup::central_midfielder,
    RoleGroup::wide_midfielder,
    RoleGroup::wide_midfielder,
    RoleGroup::central_attacker,
    RoleGroup::central_attacker,
    RoleGroup::wide_attacker,
    RoleGroup::wide_attacker,
    RoleGroup::wide_attacker,
    RoleGroup::wide_attacker,
};

constexpr std::array<std::string_view, kNumRoleGroups> kRoleGroupNames = {
    "Goalkeeper",         "Central Defender", "Wide Defender",  "Central Midfielder",
    "Wide Midfielder",    "Central Attacker", "Wide Attacker",
};

template <typename Enum, std::size_t N>
Enum lookup(const std::array<std::string_view, N>& names, std::string_view name,
            const char* what) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw DataError(std::string("unknown ") + what + " '" + std::string(name) + "'");
    }
    return static_cast<Enum>(it - names.begin());
}

}  // namespace

std::string_view team_name(Team team) { return team == Team::home ? "home" : "away"; }

Team parse_team(std::string_view name) {
    if (name == "home") return Team::home;
    if (name == "away") return Team::away;
    throw DataError("unknown team_id '" + std::string(name) + "'");
}

std::string_view direction_name(AttackDirection dir) {
    return dir == AttackDirection::positive_x ? "+x" : "-x";
}

AttackDirection parse_direction(std::string_view name) {
    if (name == "+x") return AttackDirection::positive_x;
    if (name == "-x") return AttackDirection::negative_x;
    throw DataError("unknown attack direction '" + std::string(name) + "'");
}

std::string_view event_type_name(EventType type) {
    return kEventTypeNames.at(static_cast<std::size_t>(type));
}

EventType parse_event_type(std::string_view name) {
    return lookup<EventType>(kEventTypeNames, name, "event_type");
}

std::string_view role_name(Role role) { return kRoleNames.at(static_cast<std::size_t>(role)); }

Role parse_role(std::string_view name) { return lookup<Role>(kRoleNames, name, "role"); }

RoleGroup role_group(Role role) { return kRoleGroups.at(static_cast<std::size_t>(role)); }

std::string_view role_group_name(RoleGroup group) {
    return kRoleGroupNames.at(static_cast<std::size_t>(group));
}

AttackDirection MatchData::direction(Team team, int period) const {
    if (period != 1 && period != 2) {
        throw DataError("period must be 1 or 2, got " + std::to_string(period));
    }
    return attack_direction[static_cast<std::size_t>(team)][static_cast<std::size_t>(period - 1)];
}

AttackDirection MatchData::direction_of_agent(int agent_id, int period) const {
    return direction(agent(agent_id).team, period);
}

const RosterEntry& MatchData::agent(int agent_id) const {
    if (agent_id < 0 || agent_id >= static_cast<int>(roster.size()) ||
        roster[static_cast<std::size_t>(agent_id)].agent_id != agent_id) {
        throw DataError("match " + std::to_string(match_id) + ": agent_id " +
                        std::to_string(agent_id) + " not in roster");
    }
    return roster[static_cast<std::size_t>(agent_id)];
}

double MatchData::match_clock(double t, int period) const {
    return period == 1 ? t - period_start[0] : kHalfLength + (t - period_start[1]);
}

void MatchData::validate() const {
    const std::string where = "match " + std::to_string(match_id) + ": ";
    if (roster.size() != static_cast<std::size_t>(kNumAgents)) {
        throw DataError(where + "roster must have " + std::to_string(kNumAgents) + " agents");
    }
    for (std::size_t i = 0; i < roster.size(); ++i) {
        if (roster[i].agent_id != static_cast<int>(i)) {
            throw DataError(where + "roster entries must be ordered by agent_id");
        }
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        const auto& who = agent(e.agent_id);
        if (who.team != e.team) {
            throw DataError(where + "event " + std::to_string(i) + " team does not match roster");
        }
        if (i > 0 && !(e.t > events[i - 1].t)) {
            throw DataError(where + "event times must be strictly increasing (event " +
                            std::to_string(i) + ")");
        }
        if (e.period != 1 && e.period != 2) {
            throw DataError(where + "event " + std::to_string(i) + " has invalid period");
        }
        if (!on_pitch(e.location())) {
            throw DataError(where + "event " + std::to_string(i) + " outside pitch");
        }
    }
    for (std::size_t i = 1; i < tracking.size(); ++i) {
        if (!(tracking[i].t > tracking[i - 1].t)) {
            throw DataError(where + "tracking frames must be time sorted");
        }
    }
}

ObservationMask::ObservationMask(std::size_t rows, std::vector<int> observed_agent)
    : observed_(std::move(observed_agent)) {
    if (observed_.size() != rows) {
        throw std::invalid_argument("ObservationMask: row count mismatch");
    }
}

std::vector<AgentPositions> PredictionSet::resolved() const {
    std::vector<AgentPositions> out = phi_hat;
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t][static_cast<std::size_t>(observed_agent[t])] = observed_location[t];
    }
    return out;
}

PredictionSet PredictionSet::skeleton(const MatchData& match) {
    PredictionSet set;
    set.match_id = match.match_id;
    const std::size_t rows = match.events.size();
    set.t.reserve(rows);
    set.period.reserve(rows);
    set.observed_agent.reserve(rows);
    set.observed_location.reserve(rows);
    for (const Event& e : match.events) {
        set.t.push_back(e.t);
        set.period.push_back(e.period);
        set.observed_agent.push_back(e.agent_id);
        set.observed_location.push_back(e.location());
    }
    set.phi_hat.assign(rows, AgentPositions{});
    return set;
}

ObservationMask build_observation_mask(std::span<const Event> events,
                                       std::span<const RosterEntry> roster) {
    std::vector<int> observed;
    observed.reserve(events.size());
    for (std::size_t t = 0; t < events.size(); ++t) {
        const int id = events[t].agent_id;
        const bool known = std::any_of(roster.begin(), roster.end(),
                                       [id](const RosterEntry& r) { return r.agent_id == id; });
        if (!known || id < 0 || id >= kNumAgents) {
            throw DataError("event " + std::to_string(t) + " at t=" + std::to_string(events[t].t) +
                            ": agent_id " + std::to_string(id) + " not in roster");
        }
        observed.push_back(id);
    }
    return ObservationMask(events.size(), std::move(observed));
}

std::size_t nearest_frame(std::span<const TrackingFrame> tracking, double t) {
    if (tracking.empty()) {
        throw DataError("cannot align events: tracking is empty");
    }
    const auto it = std::lower_bound(tracking.begin(), tracking.end(), t,
                                     [](const TrackingFrame& f, double v) { return f.t < v; });
    if (it == tracking.begin()) return 0;
    if (it == tracking.end()) return tracking.size() - 1;
    const auto after = static_cast<std::size_t>(it - tracking.begin());
    const std::size_t before = after - 1;
    // distances closer than a nanosecond count as a tie
    constexpr double kTieTolerance = 1e-9;
    return (t - tracking[before].t) <= (tracking[after].t - t) + kTieTolerance ? before : after;
}

std::vector<AgentPositions> align_events_to_tracking(std::span<const Event> events,
                                                     std::span<const TrackingFrame> tracking) {
    if (tracking.empty()) {
        throw DataError("cannot align events: tracking is empty");
    }
    std::vector<AgentPositions> targets;
    targets.reserve(events.size());
    for (const Event& e : events) {
        targets.push_back(tracking[nearest_frame(tracking, e.t)].positions);
    }
    return targets;
}

Point to_own_goal_frame(Point xy, AttackDirection dir) {
    if (dir == AttackDirection::positive_x) return xy;
    return {kPitchLength - xy.x, kPitchWidth - xy.y};
}

Point from_own_goal_frame(Point xy, AttackDirection dir) {
    // the reflection is its own inverse
    return to_own_goal_frame(xy, dir);
}

Point clamp_to_pitch(Point p) {
    return {std::clamp(p.x, 0.0, kPitchLength), std::clamp(p.y, 0.0, kPitchWidth)};
}

}  // namespace imputer
