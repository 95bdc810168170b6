#pragma once

// Independent brute-force recomputations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "imputer/apps.hpp"
#include "imputer/domain.hpp"
#include "imputer/eval.hpp"
#include "imputer/synthgen.hpp"

namespace oracle {

using imputer::kNumAgents;
using imputer::MatchData;
using imputer::Point;

inline Point own(const MatchData& m, int n, int period, Point p) {
    const imputer::Team team = m.roster[static_cast<std::size_t>(n)].team;
    const auto dir = m.attack_direction[static_cast<std::size_t>(team)][static_cast<std::size_t>(period - 1)];
    if (dir == imputer::AttackDirection::positive_x) return p;
    return {105.0 - p.x, 68.0 - p.y};
}

inline Point absolute(const MatchData& m, int n, int period, Point p) { return own(m, n, period, p); }

/// Linear scan for the latest event <= t and earliest event >= t by agent n;
/// -1 where none exists.
inline long scan_prev(const MatchData& m, std::size_t t, int n) {
    for (long k = static_cast<long>(t); k >= 0; --k) {
        if (m.events[static_cast<std::size_t>(k)].agent_id == n) return k;
    }
    return -1;
}

inline long scan_next(const MatchData& m, std::size_t t, int n) {
    for (std::size_t k = t; k < m.events.size(); ++k) {
        if (m.events[k].agent_id == n) return static_cast<long>(k);
    }
    return -1;
}

inline Point own_event(const MatchData& m, std::size_t k, int n) {
    const auto& e = m.events[k];
    return own(m, n, e.period, {e.x, e.y});
}

inline Point baseline1(const MatchData& m, std::size_t t, int n) {
    double sx = 0.0, sy = 0.0;
    int c = 0;
    for (std::size_t k = 0; k < m.events.size(); ++k) {
        if (m.events[k].agent_id != n) continue;
        const Point p = own_event(m, k, n);
        sx += p.x;
        sy += p.y;
        ++c;
    }
    return absolute(m, n, m.events[t].period, {sx / c, sy / c});
}

inline void bracket(const MatchData& m, std::size_t t, int n, long& prev, long& next) {
    prev = scan_prev(m, t, n);
    next = scan_next(m, t, n);
    if (prev < 0) prev = next;
    if (next < 0) next = prev;
}

inline Point baseline2(const MatchData& m, std::size_t t, int n) {
    long a, b;
    bracket(m, t, n, a, b);
    const Point p = own_event(m, static_cast<std::size_t>(a), n);
    const Point q = own_event(m, static_cast<std::size_t>(b), n);
    return absolute(m, n, m.events[t].period, {(p.x + q.x) / 2.0, (p.y + q.y) / 2.0});
}

inline Point baseline3(const MatchData& m, std::size_t t, int n) {
    long a, b;
    bracket(m, t, n, a, b);
    const Point p = own_event(m, static_cast<std::size_t>(a), n);
    const Point q = own_event(m, static_cast<std::size_t>(b), n);
    const double t0 = m.events[static_cast<std::size_t>(a)].t;
    const double t1 = m.events[static_cast<std::size_t>(b)].t;
    const double lam = t1 > t0 ? (m.events[t].t - t0) / (t1 - t0) : 0.0;
    return absolute(m, n, m.events[t].period, {p.x + lam * (q.x - p.x), p.y + lam * (q.y - p.y)});
}

/// prev/next observation indices for every (t, n) from one forward and one
/// backward pass.
struct PrevNext {
    std::vector<long> prev, next;  // [t * 22 + n]
};

inline PrevNext linear_scan(const MatchData& m) {
    const std::size_t T = m.events.size();
    PrevNext r;
    r.prev.assign(T * kNumAgents, -1);
    r.next.assign(T * kNumAgents, -1);
    std::vector<long> last(kNumAgents, -1);
    for (std::size_t t = 0; t < T; ++t) {
        last[static_cast<std::size_t>(m.events[t].agent_id)] = static_cast<long>(t);
        for (int n = 0; n < kNumAgents; ++n) r.prev[t * kNumAgents + n] = last[static_cast<std::size_t>(n)];
    }
    std::fill(last.begin(), last.end(), -1);
    for (std::size_t t = T; t-- > 0;) {
        last[static_cast<std::size_t>(m.events[t].agent_id)] = static_cast<long>(t);
        for (int n = 0; n < kNumAgents; ++n) r.next[t * kNumAgents + n] = last[static_cast<std::size_t>(n)];
    }
    return r;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Textbook LSTM step with gates stacked [i, f, o, g] in w (4h x in), u (4h x h), b (4h).
inline void lstm_step(const std::vector<double>& w, const std::vector<double>& u, const std::vector<double>& b,
                      int in, int h, const std::vector<double>& x, const std::vector<double>& h_prev,
                      const std::vector<double>& c_prev, std::vector<double>& h_out, std::vector<double>& c_out) {
    std::vector<double> z(static_cast<std::size_t>(4 * h));
    for (int r = 0; r < 4 * h; ++r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int k = 0; k < in; ++k) s += w[static_cast<std::size_t>(r * in + k)] * x[static_cast<std::size_t>(k)];
        for (int k = 0; k < h; ++k) s += u[static_cast<std::size_t>(r * h + k)] * h_prev[static_cast<std::size_t>(k)];
        z[static_cast<std::size_t>(r)] = s;
    }
    h_out.assign(static_cast<std::size_t>(h), 0.0);
    c_out.assign(static_cast<std::size_t>(h), 0.0);
    for (int j = 0; j < h; ++j) {
        const double i = sigmoid(z[static_cast<std::size_t>(j)]);
        const double f = sigmoid(z[static_cast<std::size_t>(h + j)]);
        const double o = sigmoid(z[static_cast<std::size_t>(2 * h + j)]);
        const double g = std::tanh(z[static_cast<std::size_t>(3 * h + j)]);
        const double c = f * c_prev[static_cast<std::size_t>(j)] + i * g;
        c_out[static_cast<std::size_t>(j)] = c;
        h_out[static_cast<std::size_t>(j)] = o * std::tanh(c);
    }
}

/// Student-t lower tail by adaptive quadrature of the density.
inline double t_cdf_quadrature(double t, double dof) {
    const double logc = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) - 0.5 * std::log(dof * M_PI);
    auto density = [&](double x) { return std::exp(logc - (dof + 1.0) / 2.0 * std::log1p(x * x / dof)); };
    boost::math::quadrature::exp_sinh<double> integrator;
    const double tail = integrator.integrate(density, std::abs(t), std::numeric_limits<double>::infinity(), 1e-14);
    return t < 0.0 ? tail : 1.0 - tail;
}

/// Welch one-sided p-value for mean(a) < mean(b) using the quadrature tail.
inline double welch_p(const std::vector<double>& a, const std::vector<double>& b) {
    auto moments = [](const std::vector<double>& v, double& mean, double& var) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size() - 1);
    };
    double ma, va, mb, vb;
    moments(a, ma, va);
    moments(b, mb, vb);
    const double sa = va / static_cast<double>(a.size());
    const double sb = vb / static_cast<double>(b.size());
    const double t = (ma - mb) / std::sqrt(sa + sb);
    const double dof = (sa + sb) * (sa + sb) /
                       (sa * sa / static_cast<double>(a.size() - 1) + sb * sb / static_cast<double>(b.size() - 1));
    return t_cdf_quadrature(t, dof);
}

/// Kept indices by a lagging pointer to the last kept element.
inline std::vector<std::size_t> merge_two_pointer(const std::vector<double>& times, double threshold) {
    std::vector<std::size_t> kept;
    if (times.empty()) return kept;
    std::size_t anchor = 0;
    kept.push_back(0);
    for (std::size_t lead = 1; lead < times.size(); ++lead) {
        if (times[lead] - times[anchor] >= threshold) {
            anchor = lead;
            kept.push_back(lead);
        }
    }
    return kept;
}

/// Control probability of one cell from the defining formula.
inline double pitch_cell(const imputer::AgentPositions& pos, const MatchData& m, imputer::Team attacking, Point c,
                         const imputer::PitchControlParams& p) {
    double best_att = std::numeric_limits<double>::infinity();
    double best_def = std::numeric_limits<double>::infinity();
    for (int n = 0; n < kNumAgents; ++n) {
        const double d = std::hypot(pos[static_cast<std::size_t>(n)].x - c.x, pos[static_cast<std::size_t>(n)].y - c.y);
        const double tau = p.reaction_time + d / p.max_speed;
        if (m.roster[static_cast<std::size_t>(n)].team == attacking) {
            best_att = std::min(best_att, tau);
        } else {
            best_def = std::min(best_def, tau);
        }
    }
    return sigmoid((best_def - best_att) / p.tau_scale);
}

struct RollingPoint {
    double t, mean, sigma;
    int matches;
};

/// Every window end k * step rescanned over every record of every match.
inline std::vector<RollingPoint> rolling_naive(const std::vector<imputer::ErrorRecord>& recs, double window,
                                               double step) {
    std::vector<int> ids;
    double hi = 0.0;
    for (const auto& r : recs) {
        if (std::find(ids.begin(), ids.end(), r.match_id) == ids.end()) ids.push_back(r.match_id);
        hi = std::max(hi, r.clock);
    }
    std::vector<RollingPoint> out;
    const long last = static_cast<long>(std::ceil((hi + window) / step)) + 1;
    for (long k = 0; k <= last; ++k) {
        const double end = static_cast<double>(k) * step;
        std::vector<double> means;
        for (const int id : ids) {
            double s = 0.0;
            int c = 0;
            for (const auto& r : recs) {
                if (r.match_id == id && r.clock <= end && r.clock > end - window) {
                    s += r.xy_err;
                    ++c;
                }
            }
            if (c > 0) means.push_back(s / c);
        }
        if (means.empty()) continue;
        double m = 0.0;
        for (double v : means) m += v;
        m /= static_cast<double>(means.size());
        double ss = 0.0;
        for (double v : means) ss += (v - m) * (v - m);
        const double sd = means.size() > 1 ? std::sqrt(ss / static_cast<double>(means.size() - 1)) : 0.0;
        out.push_back({end, m, sd, static_cast<int>(means.size())});
    }
    return out;
}

}  // namespace oracle
