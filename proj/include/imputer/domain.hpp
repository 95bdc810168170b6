#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace imputer {

inline constexpr double kPitchLength = 105.0;
inline constexpr double kPitchWidth = 68.0;
inline constexpr int kNumAgents = 22;
inline constexpr int kAgentsPerTeam = 11;
inline constexpr double kHalfLength = 2700.0;

/// Malformed or inconsistent input data (unknown agent, empty tracking, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Divergence, non-finite values, failed gradient checks.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

enum class Team : std::uint8_t { home = 0, away = 1 };

inline Team opponent(Team team) { return team == Team::home ? Team::away : Team::home; }
std::string_view team_name(Team team);
Team parse_team(std::string_view name);

enum class AttackDirection : std::uint8_t { positive_x, negative_x };

std::string_view direction_name(AttackDirection dir);
AttackDirection parse_direction(std::string_view name);

// Event vocabulary; the enumerator order is the embedding class index.
enum class EventType : std::uint8_t {
    pass,
    pass_received,
    foul,
    foul_won,
    duel,
    tackle,
    shot,
    save,
    intervention,
    recovery,
    interception,
    take_on,
    block,
    ball_received,
    clearance,
    error,
    goal_conceded,
    offside,
    aerial_clearance,
    pause,
    own_goal,
    control_under_pressure,
    deflection,
    carry,
    substitution,
};
inline constexpr int kNumEventTypes = 25;

std::string_view event_type_name(EventType type);
EventType parse_event_type(std::string_view name);

enum class Role : std::uint8_t {
    goalkeeper,
    center_back,
    central_defensive_midfielder,
    left_back,
    right_back,
    left_wing_back,
    right_wing_back,
    central_midfielder,
    left_midfielder,
    right_midfielder,
    central_attacking_midfielder,
    centre_forward,
    left_winger,
    right_winger,
    left_forward,
    right_forward,
};
inline constexpr int kNumRoles = 16;

enum class RoleGroup : std::uint8_t {
    goalkeeper,
    central_defender,
    wide_defender,
    central_midfielder,
    wide_midfielder,
    central_attacker,
    wide_attacker,
};
inline constexpr int kNumRoleGroups = 7;

std::string_view role_name(Role role);
Role parse_role(std::string_view name);
RoleGroup role_group(Role role);
std::string_view role_group_name(RoleGroup group);

struct Event {
    double t = 0.0;  // seconds from kickoff
    int period = 1;
    EventType type = EventType::pass;
    int agent_id = 0;
    Team team = Team::home;
    double x = 0.0;
    double y = 0.0;

    Point location() const { return {x, y}; }
};

/// One tracking sample; `positions[i]` belongs to agent id i.
struct TrackingFrame {
    double t = 0.0;
    std::array<Point, kNumAgents> positions{};
    Point ball;
};

struct RosterEntry {
    int agent_id = 0;
    Team team = Team::home;
    Role role = Role::goalkeeper;
    double minutes_played = 90.0;
};

struct Goal {
    double t = 0.0;
    Team team = Team::home;
};

struct MatchData {
    int match_id = 0;
    std::vector<RosterEntry> roster;
    std::vector<Event> events;
    std::vector<TrackingFrame> tracking;
    // indexed [team][period - 1]
    std::array<std::array<AttackDirection, 2>, 2> attack_direction{};
    std::vector<Goal> goals;
    std::array<double, 2> period_start{0.0, kHalfLength};

    AttackDirection direction(Team team, int period) const;
    AttackDirection direction_of_agent(int agent_id, int period) const;
    const RosterEntry& agent(int agent_id) const;

    /// Seconds on a 90-minute clock: period 2 restarts at 45:00, so first-half
    /// added time overlaps the start of the second half.
    double match_clock(double t, int period) const;

    /// Throws DataError when a structural invariant is broken.
    void validate() const;
};

/// T x N one-hot matrix of which agent is on the ball at each event.
class ObservationMask {
public:
    ObservationMask() = default;
    ObservationMask(std::size_t rows, std::vector<int> observed_agent);

    std::size_t rows() const { return observed_.size(); }
    std::size_t cols() const { return kNumAgents; }
    int operator()(std::size_t t, std::size_t n) const {
        return observed_[t] == static_cast<int>(n) ? 1 : 0;
    }
    int observed_agent(std::size_t t) const { return observed_[t]; }
    std::span<const int> observed_agents() const { return observed_; }

private:
    std::vector<int> observed_;
};

using AgentPositions = std::array<Point, kNumAgents>;

/// Imputed positions for every event and agent (absolute pitch frame), plus
/// the exact locations of the observed agents.
struct PredictionSet {
    int match_id = 0;
    std::vector<double> t;
    std::vector<int> period;
    std::vector<AgentPositions> phi_hat;
    std::vector<int> observed_agent;
    std::vector<Point> observed_location;

    std::size_t size() const { return t.size(); }

    /// phi_hat with each row's observed agent replaced by the event location.
    std::vector<AgentPositions> resolved() const;

    static PredictionSet skeleton(const MatchData& match);
};

ObservationMask build_observation_mask(std::span<const Event> events,
                                       std::span<const RosterEntry> roster);

/// Nearest frame to `t`; ties go to the earlier frame.
std::size_t nearest_frame(std::span<const TrackingFrame> tracking, double t);

std::vector<AgentPositions> align_events_to_tracking(std::span<const Event> events,
                                                     std::span<const TrackingFrame> tracking);

Point to_own_goal_frame(Point xy, AttackDirection dir);
Point from_own_goal_frame(Point xy, AttackDirection dir);

Point clamp_to_pitch(Point p);
inline bool on_pitch(Point p) {
    return p.x >= 0.0 && p.x <= kPitchLength && p.y >= 0.0 && p.y <= kPitchWidth;
}

}  // namespace imputer
