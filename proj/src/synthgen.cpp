#include "imputer/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "imputer/rng.hpp"

namespace imputer {

Formation default_home_formation() {
    // 4-3-3 with an attacking midfielder
    return {{
        {Role::goalkeeper, {5.0, 34.0}},
        {Role::left_back, {28.0, 56.0}},
        {Role::center_back, {24.0, 41.0}},
        {Role::center_back, {24.0, 27.0}},
        {Role::right_back, {28.0, 12.0}},
        {Role::central_defensive_midfielder, {38.0, 34.0}},
        {Role::central_midfielder, {48.0, 46.0}},
        {Role::central_attacking_midfielder, {60.0, 30.0}},
        {Role::left_winger, {68.0, 58.0}},
        {Role::right_winger, {68.0, 10.0}},
        {Role::centre_forward, {74.0, 36.0}},
    }};
}

Formation default_away_formation() {
    // 3-4-1-2 style back three with wing backs
    return {{
        {Role::goalkeeper, {5.0, 34.0}},
        {Role::left_wing_back, {35.0, 60.0}},
        {Role::center_back, {22.0, 44.0}},
        {Role::center_back, {20.0, 34.0}},
        {Role::center_back, {22.0, 24.0}},
        {Role::right_wing_back, {35.0, 8.0}},
        {Role::left_midfielder, {52.0, 52.0}},
        {Role::central_midfielder, {48.0, 34.0}},
        {Role::right_midfielder, {52.0, 16.0}},
        {Role::left_forward, {72.0, 44.0}},
        {Role::right_forward, {72.0, 24.0}},
    }};
}

void SynthConfig::validate() const {
    if (!(match_length > 0.0)) throw std::invalid_argument("SynthConfig: match_length must be > 0");
    if (!(tracking_hz > 0.0)) throw std::invalid_argument("SynthConfig: tracking_hz must be > 0");
    if (!(mean_event_gap > 0.6)) {
        throw std::invalid_argument("SynthConfig: mean_event_gap must exceed 0.6 s");
    }
    if (n_matches < 1) throw std::invalid_argument("SynthConfig: n_matches must be >= 1");
    if (noise_scale < 0.0 || ball_attraction < 0.0) {
        throw std::invalid_argument("SynthConfig: noise_scale and ball_attraction must be >= 0");
    }
    if (!(quick_gap_fraction >= 0.0 && quick_gap_fraction < 1.0)) {
        throw std::invalid_argument("SynthConfig: quick_gap_fraction must be in [0, 1)");
    }
    const double half_frames = match_length / 2.0 * tracking_hz;
    if (half_frames < 2.0) throw std::invalid_argument("SynthConfig: fewer than 2 frames per half");
    for (const Formation& f : formation) {
        const auto keepers = std::count_if(f.begin(), f.end(), [](const RoleAnchor& r) {
            return r.role == Role::goalkeeper;
        });
        if (keepers != 1) {
            throw std::invalid_argument("SynthConfig: each formation needs exactly one Goalkeeper");
        }
        for (const RoleAnchor& r : f) {
            if (!on_pitch(r.anchor)) throw std::invalid_argument("SynthConfig: anchor off pitch");
        }
    }
}

namespace {

constexpr double kMinGap = 0.2;
constexpr double kMaxGap = 20.0;

double attraction_factor(Role role) {
    switch (role_group(role)) {
        case RoleGroup::goalkeeper: return 0.15;
        case RoleGroup::central_defender:
        case RoleGroup::wide_defender: return 0.7;
        case RoleGroup::central_midfielder:
        case RoleGroup::wide_midfielder: return 1.0;
        case RoleGroup::central_attacker:
        case RoleGroup::wide_attacker: return 0.85;
    }
    return 1.0;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

class MatchSimulator {
public:
    MatchSimulator(const SynthConfig& config, int match_index)
        : cfg_(config), rng_(SeedTree(config.seed).child("match", static_cast<std::uint64_t>(match_index))) {
        match_.match_id = match_index;
        dt_ = 1.0 / cfg_.tracking_hz;
        frames_per_half_ = static_cast<long>(std::floor(cfg_.match_length / 2.0 * cfg_.tracking_hz));
        const double half = static_cast<double>(frames_per_half_) / cfg_.tracking_hz;
        match_.period_start = {0.0, half};

        for (int team = 0; team < 2; ++team) {
            for (int k = 0; k < kAgentsPerTeam; ++k) {
                const int id = team * kAgentsPerTeam + k;
                const RoleAnchor& ra = cfg_.formation[static_cast<std::size_t>(team)][static_cast<std::size_t>(k)];
                match_.roster.push_back({id, static_cast<Team>(team), ra.role, cfg_.match_length / 60.0});
                const double jitter = 0.5 * cfg_.noise_scale;
                const double jx = rng_.uniform(-1.0, 1.0) * jitter;
                const double jy = rng_.uniform(-1.0, 1.0) * jitter;
                anchor_own_[static_cast<std::size_t>(id)] = clamp_to_pitch({ra.anchor.x + jx, ra.anchor.y + jy});
            }
        }
        const bool home_positive_first = rng_.bernoulli(0.5);
        const auto first = home_positive_first ? AttackDirection::positive_x : AttackDirection::negative_x;
        const auto second = home_positive_first ? AttackDirection::negative_x : AttackDirection::positive_x;
        match_.attack_direction[0] = {first, second};
        match_.attack_direction[1] = {second, first};

        const double q = cfg_.quick_gap_fraction;
        tail_mean_ = std::max(0.05, (cfg_.mean_event_gap - q * 0.5 * (kMinGap + 1.0)) / (1.0 - q) - 1.0);
    }

    MatchData run() {
        match_.tracking.reserve(static_cast<std::size_t>(2 * frames_per_half_));
        for (int period = 1; period <= 2; ++period) simulate_period(period);
        for (int id = 0; id < kNumAgents; ++id) {
            if (!observed_[static_cast<std::size_t>(id)]) {
                throw DataError("synthetic match " + std::to_string(match_.match_id) + ": agent " +
                                std::to_string(id) + " never observed; match too short");
            }
        }
        return std::move(match_);
    }

private:
    struct Pending {
        long t_ms = 0;
        EventType type = EventType::pass;
        int agent = 0;
    };

    const RosterEntry& who(int id) const { return match_.roster[static_cast<std::size_t>(id)]; }
    AttackDirection dir_of(int id) const { return match_.direction(who(id).team, period_); }
    Point own(int id, Point abs) const { return to_own_goal_frame(abs, dir_of(id)); }
    Point pos(int id) const { return pos_[static_cast<std::size_t>(id)]; }

    long frame_index_for(long t_ms) const {
        // same rule as nearest_frame(): nearest, ties to the earlier frame
        const double t = static_cast<double>(t_ms) / 1000.0;
        const long before = static_cast<long>(std::floor(t * cfg_.tracking_hz));
        const double t_before = static_cast<double>(before) / cfg_.tracking_hz;
        const double t_after = static_cast<double>(before + 1) / cfg_.tracking_hz;
        return (t - t_before) <= (t_after - t) + 1e-9 ? before : before + 1;
    }

    double draw_gap() {
        double gap;
        if (rng_.bernoulli(cfg_.quick_gap_fraction)) {
            gap = rng_.uniform(kMinGap, 1.0);
        } else {
            gap = 1.0 + rng_.exponential(tail_mean_);
        }
        return std::clamp(gap, kMinGap, kMaxGap);
    }

    int team_keeper(Team team) const {
        for (const auto& r : match_.roster) {
            if (r.team == team && r.role == Role::goalkeeper) return r.agent_id;
        }
        return static_cast<int>(team) * kAgentsPerTeam;
    }

    int most_advanced(Team team) const {
        int best = -1;
        double best_x = -1.0;
        for (const auto& r : match_.roster) {
            if (r.team != team) continue;
            const double x = anchor_own_[static_cast<std::size_t>(r.agent_id)].x;
            if (x > best_x) {
                best_x = x;
                best = r.agent_id;
            }
        }
        return best;
    }

    int nearest_of_team(Point p, Team team, bool include_keeper = true, int exclude = -1) const {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& r : match_.roster) {
            if (r.team != team || r.agent_id == exclude) continue;
            if (!include_keeper && r.role == Role::goalkeeper) continue;
            const double d = distance(p, pos(r.agent_id));
            if (d < best_d) {
                best_d = d;
                best = r.agent_id;
            }
        }
        return best;
    }

    int nearest_any(Point p) const {
        const int a = nearest_of_team(p, Team::home);
        const int b = nearest_of_team(p, Team::away);
        return distance(p, pos(a)) <= distance(p, pos(b)) ? a : b;
    }

    int pick_receiver(int holder) {
        const Team team = who(holder).team;
        const Point from = own(holder, pos(holder));
        std::array<double, kNumAgents> w{};
        double total = 0.0;
        for (const auto& r : match_.roster) {
            if (r.team != team || r.agent_id == holder) continue;
            const Point to = own(r.agent_id, pos(r.agent_id));
            double weight = std::exp(-distance(from, to) / 18.0);
            if (r.role == Role::goalkeeper) weight *= 0.2;
            if (to.x > from.x) weight *= 1.6;
            if (!observed_[static_cast<std::size_t>(r.agent_id)]) weight *= 5.0;
            w[static_cast<std::size_t>(r.agent_id)] = weight;
            total += weight;
        }
        double u = rng_.uniform() * total;
        for (int id = 0; id < kNumAgents; ++id) {
            u -= w[static_cast<std::size_t>(id)];
            if (u < 0.0 && w[static_cast<std::size_t>(id)] > 0.0) return id;
        }
        for (int id = kNumAgents - 1; id >= 0; --id) {
            if (w[static_cast<std::size_t>(id)] > 0.0) return id;
        }
        return holder;
    }

    void schedule(EventType type, int agent, double gap) {
        const long gap_ms = std::max(static_cast<long>(kMinGap * 1000.0), std::lround(gap * 1000.0));
        const long t_ms = last_t_ms_ + gap_ms;
        if (t_ms > period_last_ms_) {
            pending_valid_ = false;
            return;
        }
        pending_ = {t_ms, type, agent};
        pending_valid_ = true;
    }

    void holder_continues(int h) {
        const Point p = own(h, pos(h));
        const bool shooting_zone = p.x > 72.0 && std::abs(p.y - 34.0) < 24.0;
        const bool own_third = p.x < 30.0;
        const double u = rng_.uniform();
        if (shooting_zone && u < 0.12) return schedule(EventType::shot, h, draw_gap());
        if (own_third && u < 0.08) return schedule(EventType::clearance, h, draw_gap());
        if (u < 0.55) return schedule(EventType::pass, h, draw_gap());
        if (u < 0.75) return schedule(EventType::carry, h, draw_gap());
        if (u < 0.84) return schedule(EventType::take_on, h, draw_gap());
        if (u < 0.92) return schedule(EventType::control_under_pressure, h, draw_gap());
        if (u < 0.99) {
            duel_attacker_ = h;
            return schedule(EventType::duel, h, draw_gap());
        }
        return schedule(EventType::error, h, draw_gap());
    }

    void start_corner(Team attacking) {
        const AttackDirection dir = match_.direction(attacking, period_);
        const double ball_y_own = to_own_goal_frame(ball_, dir).y;
        const Point corner_own{104.0, ball_y_own > 34.0 ? 67.0 : 1.0};
        corner_ = from_own_goal_frame(corner_own, dir);
        box_ = from_own_goal_frame({95.0, 34.0}, dir);
        taker_ = nearest_of_team(corner_, attacking, false);
        set_piece_ = true;
        schedule(EventType::pass, taker_, rng_.uniform(12.0, kMaxGap));
    }

    void decide_next(const Event& e) {
        const int h = e.agent_id;
        const Team team = e.team;
        switch (e.type) {
            case EventType::pass: {
                const int r = pick_receiver(h);
                const double u = rng_.uniform();
                if (u < 0.80) return schedule(EventType::pass_received, r, draw_gap());
                if (u < 0.90) {
                    return schedule(EventType::interception, nearest_of_team(pos(r), opponent(team)), draw_gap());
                }
                if (u < 0.93) return schedule(EventType::ball_received, r, draw_gap());
                if (u < 0.95) return schedule(EventType::offside, r, draw_gap());
                if (u < 0.97) {
                    const Point mid{0.5 * (pos(h).x + pos(r).x), 0.5 * (pos(h).y + pos(r).y)};
                    return schedule(EventType::deflection, nearest_of_team(mid, opponent(team)), draw_gap());
                }
                if (u < 0.985) {
                    return schedule(EventType::aerial_clearance, nearest_of_team(pos(r), opponent(team)), draw_gap());
                }
                return schedule(EventType::intervention, nearest_of_team(pos(r), opponent(team)), draw_gap());
            }
            case EventType::pass_received:
            case EventType::ball_received:
            case EventType::recovery:
            case EventType::interception:
            case EventType::tackle:
            case EventType::carry:
            case EventType::control_under_pressure:
                return holder_continues(h);
            case EventType::save:
            case EventType::foul_won:
                return schedule(EventType::pass, h, draw_gap());
            case EventType::take_on:
                duel_attacker_ = h;
                return schedule(EventType::duel, nearest_of_team(pos(h), opponent(team), false), draw_gap());
            case EventType::duel: {
                if (h == duel_attacker_) {
                    return schedule(EventType::duel, nearest_of_team(pos(h), opponent(team), false), draw_gap());
                }
                const double u = rng_.uniform();
                if (u < 0.45) return schedule(EventType::tackle, h, draw_gap());
                if (u < 0.6) {
                    foul_victim_ = duel_attacker_;
                    return schedule(EventType::foul, h, draw_gap());
                }
                return schedule(EventType::carry, duel_attacker_, draw_gap());
            }
            case EventType::foul:
                return schedule(EventType::foul_won, foul_victim_, draw_gap());
            case EventType::offside:
                return schedule(EventType::pass, nearest_of_team(pos(h), opponent(team), false), draw_gap());
            case EventType::deflection:
            case EventType::aerial_clearance:
            case EventType::intervention:
            case EventType::block:
            case EventType::error:
                return schedule(EventType::recovery, nearest_any(ball_), draw_gap());
            case EventType::clearance: {
                const Point landing = from_own_goal_frame({rng_.uniform(45.0, 80.0), rng_.uniform(8.0, 60.0)},
                                                          match_.direction(team, period_));
                return schedule(EventType::recovery, nearest_any(landing), draw_gap());
            }
            case EventType::shot: {
                const int keeper = team_keeper(opponent(team));
                const double u = rng_.uniform();
                if (u < cfg_.goal_probability) {
                    match_.goals.push_back({e.t, team});
                    return schedule(EventType::goal_conceded, keeper, draw_gap());
                }
                if (u < 0.45) {
                    if (rng_.bernoulli(cfg_.set_piece_probability)) {
                        pending_corner_ = team;
                        return schedule(EventType::save, keeper, draw_gap());
                    }
                    return schedule(EventType::save, keeper, draw_gap());
                }
                if (u < 0.7) {
                    if (rng_.bernoulli(cfg_.set_piece_probability)) {
                        return start_corner(team);
                    }
                    return schedule(EventType::block, nearest_of_team(pos(h), opponent(team), false), draw_gap());
                }
                // off target: goal kick
                return schedule(EventType::pass, keeper, rng_.uniform(8.0, 15.0));
            }
            case EventType::goal_conceded:
                return schedule(EventType::pass, most_advanced(team), kMaxGap);
            case EventType::pause:
            case EventType::own_goal:
            case EventType::substitution:
                return schedule(EventType::pass, h, draw_gap());
        }
    }

    void update_agents() {
        const double ou_decay = dt_ / cfg_.drift_time_constant;
        const double ou_kick = cfg_.noise_scale * std::sqrt(2.0 * ou_decay);
        const double follow = std::min(1.0, dt_ / cfg_.move_time_constant);
        const double step_cap = cfg_.max_speed * dt_;
        for (int id = 0; id < kNumAgents; ++id) {
            const auto i = static_cast<std::size_t>(id);
            const RosterEntry& r = who(id);
            const AttackDirection dir = dir_of(id);
            const bool keeper = r.role == Role::goalkeeper;
            const double k = cfg_.ball_attraction * attraction_factor(r.role);

            Point target_own = anchor_own_[i];
            if (!keeper) {
                const double push = cfg_.possession_push * cfg_.ball_attraction;
                target_own.x += (possession_ == r.team) ? push : -0.5 * push;
            }
            Point target = from_own_goal_frame(clamp_to_pitch(target_own), dir);
            if (set_piece_ && !keeper) {
                const Point goal = id == taker_ ? corner_ : box_;
                const double pull = std::min(1.0, (id == taker_ ? 3.0 : 2.2) * k);
                target.x += pull * (goal.x - target.x);
                target.y += pull * (goal.y - target.y);
            } else {
                target.x += k * (ball_smooth_.x - target.x);
                target.y += k * (ball_smooth_.y - target.y);
            }

            Point& drift = drift_own_[i];
            drift.x += -drift.x * ou_decay + ou_kick * rng_.normal();
            drift.y += -drift.y * ou_decay + ou_kick * rng_.normal();
            const double sign = dir == AttackDirection::positive_x ? 1.0 : -1.0;
            target = clamp_to_pitch({target.x + sign * drift.x, target.y + sign * drift.y});

            Point& p = pos_[i];
            double dx = (target.x - p.x) * follow;
            double dy = (target.y - p.y) * follow;
            const double step = std::hypot(dx, dy);
            if (step > step_cap) {
                dx *= step_cap / step;
                dy *= step_cap / step;
            }
            p = clamp_to_pitch({p.x + dx, p.y + dy});
        }
    }

    void simulate_period(int period) {
        period_ = period;
        const long first_frame = (period - 1) * frames_per_half_;
        const long last_frame = first_frame + frames_per_half_ - 1;
        period_last_ms_ = static_cast<long>(
            std::floor(static_cast<double>(last_frame) / cfg_.tracking_hz * 1000.0));

        for (int id = 0; id < kNumAgents; ++id) {
            pos_[static_cast<std::size_t>(id)] = from_own_goal_frame(anchor_own_[static_cast<std::size_t>(id)], dir_of(id));
        }
        ball_ = {kPitchLength / 2.0, kPitchWidth / 2.0};
        ball_smooth_ = ball_;
        set_piece_ = false;
        pending_corner_.reset();
        const Team kickoff = period == 1 ? Team::home : Team::away;
        possession_ = kickoff;
        last_t_ms_ = static_cast<long>(std::llround(match_.period_start[static_cast<std::size_t>(period - 1)] * 1000.0));
        last_location_ = ball_;
        schedule(EventType::pass, most_advanced(kickoff), 0.5);

        for (long f = first_frame; f <= last_frame; ++f) {
            const double t = static_cast<double>(f) / cfg_.tracking_hz;
            if (f != first_frame) update_agents();

            bool emitted = false;
            while (pending_valid_ && frame_index_for(pending_.t_ms) == f) {
                emit(period);
                emitted = true;
            }
            if (!emitted && pending_valid_) {
                const double t_last = static_cast<double>(last_t_ms_) / 1000.0;
                const double t_next = static_cast<double>(pending_.t_ms) / 1000.0;
                const double frac = std::clamp((t - t_last) / (t_next - t_last), 0.0, 1.0);
                const Point target = pos(pending_.agent);
                ball_ = {last_location_.x + frac * (target.x - last_location_.x),
                         last_location_.y + frac * (target.y - last_location_.y)};
            }
            const double smooth = std::min(1.0, dt_ / cfg_.ball_smoothing);
            ball_smooth_.x += (ball_.x - ball_smooth_.x) * smooth;
            ball_smooth_.y += (ball_.y - ball_smooth_.y) * smooth;

            TrackingFrame frame;
            frame.t = t;
            frame.positions = pos_;
            frame.ball = ball_;
            match_.tracking.push_back(frame);
        }
    }

    void emit(int period) {
        const Pending ev = pending_;
        pending_valid_ = false;
        Event e;
        e.t = static_cast<double>(ev.t_ms) / 1000.0;
        e.period = period;
        e.type = ev.type;
        e.agent_id = ev.agent;
        e.team = who(ev.agent).team;
        const Point loc = pos(ev.agent);
        e.x = loc.x;
        e.y = loc.y;
        match_.events.push_back(e);
        observed_[static_cast<std::size_t>(ev.agent)] = true;

        ball_ = loc;
        last_location_ = loc;
        last_t_ms_ = ev.t_ms;
        if (e.type != EventType::foul && e.type != EventType::duel) possession_ = e.team;
        if (e.type == EventType::foul) possession_ = opponent(e.team);
        if (set_piece_ && ev.agent == taker_ && e.type == EventType::pass) set_piece_ = false;

        if (pending_corner_ && e.type == EventType::save) {
            const Team attacking = *pending_corner_;
            pending_corner_.reset();
            start_corner(attacking);
            return;
        }
        decide_next(e);
    }

    const SynthConfig& cfg_;
    Rng rng_;
    MatchData match_;
    double dt_ = 0.1;
    long frames_per_half_ = 0;
    double tail_mean_ = 1.0;

    std::array<Point, kNumAgents> anchor_own_{};
    std::array<Point, kNumAgents> drift_own_{};
    std::array<Point, kNumAgents> pos_{};
    std::array<bool, kNumAgents> observed_{};
    Point ball_;
    Point ball_smooth_;
    Point last_location_;

    int period_ = 1;
    long period_last_ms_ = 0;
    long last_t_ms_ = 0;
    Pending pending_;
    bool pending_valid_ = false;
    Team possession_ = Team::home;

    int duel_attacker_ = -1;
    int foul_victim_ = 0;
    bool set_piece_ = false;
    int taker_ = -1;
    Point corner_;
    Point box_;
    std::optional<Team> pending_corner_;
};

}  // namespace

MatchData generate_match(const SynthConfig& config, int match_index) {
    config.validate();
    MatchSimulator sim(config, match_index);
    MatchData match = sim.run();
    match.validate();
    return match;
}

std::vector<Fold> make_folds(int n_matches, int folds, int test_size) {
    if (folds < 1 || test_size < 1) throw std::invalid_argument("make_folds: folds and test_size must be >= 1");
    if (n_matches < folds * test_size) {
        throw std::invalid_argument("make_folds: " + std::to_string(n_matches) + " matches cannot supply " +
                                    std::to_string(folds) + " disjoint test sets of " + std::to_string(test_size));
    }
    std::vector<Fold> out(static_cast<std::size_t>(folds));
    for (int k = 0; k < folds; ++k) {
        Fold& fold = out[static_cast<std::size_t>(k)];
        for (int m = 0; m < n_matches; ++m) {
            const bool is_test = m >= k * test_size && m < (k + 1) * test_size;
            (is_test ? fold.test : fold.train).push_back(m);
        }
    }
    return out;
}

Dataset generate_dataset(const SynthConfig& config) {
    config.validate();
    Dataset data;
    data.folds = make_folds(config.n_matches, config.folds, config.test_size);
    data.matches.reserve(static_cast<std::size_t>(config.n_matches));
    for (int m = 0; m < config.n_matches; ++m) data.matches.push_back(generate_match(config, m));
    return data;
}

}  // namespace imputer
