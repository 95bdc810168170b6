#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "imputer/eval.hpp"
#include "imputer/features.hpp"

namespace imputer {

std::vector<ErrorRecord> error_records(const PredictionSet& predictions, const MatchData& match) {
    if (predictions.size() != match.events.size()) {
        throw DataError("error_records: prediction rows do not match events of match " +
                        std::to_string(match.match_id));
    }
    const auto truth = align_events_to_tracking(match.events, match.tracking);
    const ObservationMask mask = build_observation_mask(match.events, match.roster);
    const ObservationIndex index(match, mask);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<ErrorRecord> out;
    out.reserve(match.events.size() * kNumAgents);
    for (std::size_t t = 0; t < match.events.size(); ++t) {
        const Event& e = match.events[t];
        for (int n = 0; n < kNumAgents; ++n) {
            const auto k = static_cast<std::size_t>(n);
            ErrorRecord r;
            r.match_id = match.match_id;
            r.t = e.t;
            r.clock = match.match_clock(e.t, e.period);
            r.period = e.period;
            r.agent_id = n;
            r.role_group = role_group(match.agent(n).role);
            r.x_err = std::abs(predictions.phi_hat[t][k].x - truth[t][k].x);
            r.y_err = std::abs(predictions.phi_hat[t][k].y - truth[t][k].y);
            r.xy_err = std::hypot(r.x_err, r.y_err);
            const auto prev = index.prev(t, n);
            const auto next = index.next(t, n);
            r.time_since_obs = prev == ObservationIndex::kNone ? nan : e.t - match.events[static_cast<std::size_t>(prev)].t;
            r.time_until_obs = next == ObservationIndex::kNone ? nan : match.events[static_cast<std::size_t>(next)].t - e.t;
            out.push_back(r);
        }
    }
    return out;
}

PositionalError positional_errors(std::span<const ErrorRecord> records) {
    PositionalError p;
    for (const ErrorRecord& r : records) {
        p.x += r.x_err;
        p.y += r.y_err;
        p.xy += r.xy_err;
    }
    p.count = records.size();
    if (p.count > 0) {
        const auto n = static_cast<double>(p.count);
        p.x /= n;
        p.y /= n;
        p.xy /= n;
    }
    return p;
}

namespace {

MetricCI fold_ci(std::span<const PositionalError> folds, double PositionalError::*field) {
    MetricCI m;
    if (folds.empty()) return m;
    const auto k = static_cast<double>(folds.size());
    bool identical = true;
    for (const PositionalError& f : folds) {
        m.mean += f.*field;
        identical = identical && f.*field == folds.front().*field;
    }
    m.mean /= k;
    if (identical) {
        m.mean = folds.front().*field;
        return m;
    }
    double ss = 0.0;
    for (const PositionalError& f : folds) ss += (f.*field - m.mean) * (f.*field - m.mean);
    m.ci = 1.96 * std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    return m;
}

}  // namespace

PositionalSummary summarize_folds(std::span<const PositionalError> folds) {
    return {fold_ci(folds, &PositionalError::x), fold_ci(folds, &PositionalError::y),
            fold_ci(folds, &PositionalError::xy)};
}

namespace {

struct Sample {
    double clock;
    double err;
};

// Windowed means of one match's records, indexed by step number.
std::map<long, double> match_windows(std::vector<Sample> samples, double window, double step) {
    std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
        return a.clock < b.clock || (a.clock == b.clock && a.err < b.err);
    });
    std::map<long, double> out;
    if (samples.empty()) return out;
    const long first = static_cast<long>(std::floor(std::max(0.0, samples.front().clock) / step));
    const long last = static_cast<long>(std::ceil((samples.back().clock + window) / step));
    std::size_t lo = 0, hi = 0;
    double sum = 0.0;
    for (long k = first; k <= last; ++k) {
        const double end = static_cast<double>(k) * step;
        while (hi < samples.size() && samples[hi].clock <= end) sum += samples[hi++].err;
        while (lo < hi && samples[lo].clock <= end - window) sum -= samples[lo++].err;
        if (hi > lo) {
            // recompute from scratch periodically so the running sum does not drift
            if ((k & 1023) == 0) {
                sum = 0.0;
                for (std::size_t i = lo; i < hi; ++i) sum += samples[i].err;
            }
            out[k] = sum / static_cast<double>(hi - lo);
        }
    }
    return out;
}

std::map<int, std::vector<Sample>> group_by_match(std::span<const ErrorRecord> records) {
    std::map<int, std::vector<Sample>> by_match;
    for (const ErrorRecord& r : records) by_match[r.match_id].push_back({r.clock, r.xy_err});
    return by_match;
}

RollingSeries to_series(const std::map<long, double>& points, double step) {
    RollingSeries s;
    for (const auto& [k, v] : points) {
        s.t.push_back(static_cast<double>(k) * step);
        s.mean.push_back(v);
        s.sigma.push_back(0.0);
        s.matches.push_back(1);
    }
    return s;
}

}  // namespace

std::map<int, RollingSeries> rolling_error_by_match(std::span<const ErrorRecord> records, double window,
                                                    double step) {
    if (!(window > 0.0) || !(step > 0.0)) throw std::invalid_argument("rolling_error: window and step must be positive");
    std::map<int, RollingSeries> out;
    for (auto& [id, samples] : group_by_match(records)) out[id] = to_series(match_windows(samples, window, step), step);
    return out;
}

RollingSeries rolling_error(std::span<const ErrorRecord> records, double window, double step) {
    if (!(window > 0.0) || !(step > 0.0)) throw std::invalid_argument("rolling_error: window and step must be positive");
    std::map<long, std::vector<double>> by_step;
    for (auto& [id, samples] : group_by_match(records)) {
        for (const auto& [k, v] : match_windows(samples, window, step)) by_step[k].push_back(v);
    }
    RollingSeries s;
    for (const auto& [k, values] : by_step) {
        const auto n = static_cast<double>(values.size());
        double mean = 0.0;
        for (const double v : values) mean += v;
        mean /= n;
        double ss = 0.0;
        for (const double v : values) ss += (v - mean) * (v - mean);
        s.t.push_back(static_cast<double>(k) * step);
        s.mean.push_back(mean);
        s.sigma.push_back(values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0);
        s.matches.push_back(static_cast<int>(values.size()));
    }
    return s;
}

std::array<GroupError, kNumRoleGroups> error_by_role(std::span<const ErrorRecord> records) {
    std::array<std::vector<ErrorRecord>, kNumRoleGroups> split;
    for (const ErrorRecord& r : records) split[static_cast<std::size_t>(r.role_group)].push_back(r);
    std::array<GroupError, kNumRoleGroups> out;
    for (std::size_t g = 0; g < split.size(); ++g) {
        out[g].present = !split[g].empty();
        out[g].error = positional_errors(split[g]);
    }
    return out;
}

std::vector<OffsetPoint> error_by_offset(std::span<const ErrorRecord> records, OffsetDirection direction,
                                         double bucket) {
    if (!(bucket > 0.0)) throw std::invalid_argument("error_by_offset: bucket must be positive");
    std::map<long, std::pair<double, std::size_t>> acc;
    for (const ErrorRecord& r : records) {
        const double v = direction == OffsetDirection::since ? r.time_since_obs : r.time_until_obs;
        if (!std::isfinite(v) || v < 0.0) continue;
        auto& slot = acc[static_cast<long>(std::floor(v / bucket))];
        slot.first += r.xy_err;
        ++slot.second;
    }
    std::vector<OffsetPoint> out;
    for (const auto& [k, s] : acc) {
        out.push_back({static_cast<double>(k + 1) * bucket, s.first / static_cast<double>(s.second), s.second});
    }
    return out;
}

}  // namespace imputer
