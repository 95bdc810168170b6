#include "imputer/features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

namespace imputer {

ObservationIndex::ObservationIndex(const MatchData& match, const ObservationMask& mask)
    : match_(&match), rows_(mask.rows()) {
    if (mask.rows() != match.events.size()) {
        throw std::invalid_argument("ObservationIndex: mask rows do not match event count");
    }
    prev_.assign(rows_ * kNumAgents, kNone);
    next_.assign(rows_ * kNumAgents, kNone);
    first_.fill(kNone);
    last_.fill(kNone);

    std::array<std::int32_t, kNumAgents> seen{};
    seen.fill(kNone);
    for (std::size_t t = 0; t < rows_; ++t) {
        const int who = mask.observed_agent(t);
        seen[static_cast<std::size_t>(who)] = static_cast<std::int32_t>(t);
        std::copy(seen.begin(), seen.end(), prev_.begin() + static_cast<std::ptrdiff_t>(t * kNumAgents));
    }
    seen.fill(kNone);
    for (std::size_t t = rows_; t-- > 0;) {
        const int who = mask.observed_agent(t);
        seen[static_cast<std::size_t>(who)] = static_cast<std::int32_t>(t);
        std::copy(seen.begin(), seen.end(), next_.begin() + static_cast<std::ptrdiff_t>(t * kNumAgents));
    }
    if (rows_ > 0) {
        for (int n = 0; n < kNumAgents; ++n) {
            first_[static_cast<std::size_t>(n)] = next(0, n);
            last_[static_cast<std::size_t>(n)] = prev(rows_ - 1, n);
        }
    }

    std::array<double, kNumAgents> sx{}, sy{};
    std::array<int, kNumAgents> count{};
    for (std::size_t t = 0; t < rows_; ++t) {
        const int who = mask.observed_agent(t);
        const Point p = own_location(t, who);
        sx[static_cast<std::size_t>(who)] += p.x;
        sy[static_cast<std::size_t>(who)] += p.y;
        ++count[static_cast<std::size_t>(who)];
    }
    for (std::size_t n = 0; n < static_cast<std::size_t>(kNumAgents); ++n) {
        if (count[n] > 0) mean_own_[n] = {sx[n] / count[n], sy[n] / count[n]};
    }
}

Point ObservationIndex::own_location(std::size_t t, int n) const {
    const Event& e = match_->events[t];
    return to_own_goal_frame(e.location(), match_->direction_of_agent(n, e.period));
}

std::vector<int> home_goal_difference(const MatchData& match) {
    std::vector<Goal> goals = match.goals;
    std::sort(goals.begin(), goals.end(), [](const Goal& a, const Goal& b) { return a.t < b.t; });
    std::vector<int> out;
    out.reserve(match.events.size());
    std::size_t g = 0;
    int diff = 0;
    for (const Event& e : match.events) {
        while (g < goals.size() && goals[g].t < e.t) {
            diff += goals[g].team == Team::home ? 1 : -1;
            ++g;
        }
        out.push_back(diff);
    }
    return out;
}

FeatureRow compute_agent_features(const MatchData& match, const ObservationIndex& index,
                                  std::span<const int> home_goal_diff, std::size_t t, int n) {
    if (t >= index.rows() || n < 0 || n >= kNumAgents) {
        throw std::out_of_range("compute_agent_features: (t, n) out of range");
    }
    auto prev = index.prev(t, n);
    auto next = index.next(t, n);
    if (prev == ObservationIndex::kNone && next == ObservationIndex::kNone) {
        throw DataError("match " + std::to_string(match.match_id) + ": agent " + std::to_string(n) +
                        " is never observed");
    }
    // before the first / after the last observation, the missing side copies the available one
    if (prev == ObservationIndex::kNone) prev = next;
    if (next == ObservationIndex::kNone) next = prev;

    const Event& e = match.events[t];
    const RosterEntry& agent = match.agent(n);
    const auto tp = static_cast<std::size_t>(prev);
    const auto tn = static_cast<std::size_t>(next);

    FeatureRow row;
    row.prev_agent_time = std::abs(e.t - match.events[tp].t);
    row.next_agent_time = std::abs(match.events[tn].t - e.t);
    const Point p = index.own_location(tp, n);
    const Point q = index.own_location(tn, n);
    row.prev_agent_x = p.x;
    row.prev_agent_y = p.y;
    row.next_agent_x = q.x;
    row.next_agent_y = q.y;
    const Point av = index.mean_own_location(n);
    row.av_agent_x = av.x;
    row.av_agent_y = av.y;
    const Point ev = to_own_goal_frame(e.location(), match.direction(agent.team, e.period));
    row.event_x = ev.x;
    row.event_y = ev.y;

    row.agent_role = agent.role;
    row.agent_side = agent.team == e.team ? 1 : 0;
    row.agent_observed = e.agent_id == n ? 1 : 0;
    const int diff = home_goal_diff[t] * (agent.team == Team::home ? 1 : -1);
    row.goal_diff = std::clamp(diff, -kGoalDiffLimit, kGoalDiffLimit);
    row.event_type = e.type;
    return row;
}

FeatureRow compute_agent_features(const MatchData& match, const ObservationMask& mask, std::size_t t, int n) {
    const ObservationIndex index(match, mask);
    const auto goal_diff = home_goal_difference(match);
    return compute_agent_features(match, index, goal_diff, t, n);
}

std::vector<FeatureRow> compute_match_features(const MatchData& match, const ObservationMask& mask) {
    const ObservationIndex index(match, mask);
    const auto goal_diff = home_goal_difference(match);
    std::vector<FeatureRow> rows;
    rows.reserve(mask.rows() * kNumAgents);
    for (std::size_t t = 0; t < mask.rows(); ++t) {
        for (int n = 0; n < kNumAgents; ++n) rows.push_back(compute_agent_features(match, index, goal_diff, t, n));
    }
    return rows;
}

double quantile(std::vector<double>& values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double a = values[lo];
    if (frac == 0.0 || lo + 1 >= values.size()) return a;
    const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return a + frac * (b - a);
}

ScalerParams fit_scalers(std::span<const FeatureRow> train_rows) {
    if (train_rows.empty()) throw std::invalid_argument("fit_scalers: no training rows");
    ScalerParams p;
    p.x_min = p.y_min = std::numeric_limits<double>::infinity();
    p.x_max = p.y_max = -std::numeric_limits<double>::infinity();
    std::vector<double> times;
    times.reserve(train_rows.size() * 2);
    for (const FeatureRow& row : train_rows) {
        const auto v = row.numeric();
        for (const int i : kXFeatures) {
            p.x_min = std::min(p.x_min, v[static_cast<std::size_t>(i)]);
            p.x_max = std::max(p.x_max, v[static_cast<std::size_t>(i)]);
        }
        for (const int i : kYFeatures) {
            p.y_min = std::min(p.y_min, v[static_cast<std::size_t>(i)]);
            p.y_max = std::max(p.y_max, v[static_cast<std::size_t>(i)]);
        }
        for (const int i : kTimeFeatures) times.push_back(v[static_cast<std::size_t>(i)]);
    }
    if (!(p.x_max > p.x_min)) {
        std::clog << "fit_scalers: degenerate X spread, using unit denominator\n";
        p.x_max = p.x_min + 1.0;
    }
    if (!(p.y_max > p.y_min)) {
        std::clog << "fit_scalers: degenerate Y spread, using unit denominator\n";
        p.y_max = p.y_min + 1.0;
    }
    p.time_median = quantile(times, 0.5);
    const double q1 = quantile(times, 0.25);
    const double q3 = quantile(times, 0.75);
    p.time_iqr = q3 - q1;
    if (!(p.time_iqr > 0.0)) {
        std::clog << "fit_scalers: degenerate time IQR, using 1.0\n";
        p.time_iqr = 1.0;
    }
    return p;
}

std::array<double, kNumNumericFeatures> apply_scalers(const FeatureRow& row, const ScalerParams& params) {
    auto v = row.numeric();
    for (const int i : kTimeFeatures) v[static_cast<std::size_t>(i)] = params.scale_time(v[static_cast<std::size_t>(i)]);
    for (const int i : kXFeatures) v[static_cast<std::size_t>(i)] = params.scale_x(v[static_cast<std::size_t>(i)]);
    for (const int i : kYFeatures) v[static_cast<std::size_t>(i)] = params.scale_y(v[static_cast<std::size_t>(i)]);
    return v;
}

int EmbeddingTables::dim_for(int classes) {
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(classes)))));
}

EmbeddingTables EmbeddingTables::generate(const SeedTree& seeds) {
    EmbeddingTables out;
    for (std::size_t i = 0; i < kClasses.size(); ++i) {
        Rng rng(seeds.child("embedding", i));
        const int classes = kClasses[i];
        Eigen::MatrixXd m(classes, dim_for(classes));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal();
        }
        out.tables[i] = std::move(m);
    }
    return out;
}

int EmbeddingTables::total_dim() const {
    int total = 0;
    for (const auto& t : tables) total += static_cast<int>(t.cols());
    return total;
}

FeatureVector embed_and_concat(const FeatureRow& row, const ScalerParams& scalers, const EmbeddingTables& tables) {
    const std::array<int, kNumCategoricalFeatures> classes = {
        static_cast<int>(row.agent_role), static_cast<int>(row.event_type), row.agent_side, row.agent_observed,
        row.goal_diff + kGoalDiffLimit};
    if (kNumNumericFeatures + tables.total_dim() != kFeatureWidth) {
        throw std::invalid_argument("embed_and_concat: embedding tables do not add up to the feature width");
    }
    FeatureVector out;
    const auto numeric = apply_scalers(row, scalers);
    for (int i = 0; i < kNumNumericFeatures; ++i) out(i) = numeric[static_cast<std::size_t>(i)];
    Eigen::Index offset = kNumNumericFeatures;
    for (std::size_t k = 0; k < tables.tables.size(); ++k) {
        const auto& table = tables.tables[k];
        if (classes[k] < 0 || classes[k] >= table.rows()) {
            throw DataError("embed_and_concat: categorical feature " + std::to_string(k) + " value " +
                            std::to_string(classes[k]) + " outside vocabulary");
        }
        out.segment(offset, table.cols()) = table.row(classes[k]).transpose();
        offset += table.cols();
    }
    return out;
}

WindowSpec window_spec(std::span<const double> event_times, std::size_t t, int length) {
    if (length < 1 || length % 2 == 0) throw std::invalid_argument("window length must be odd and positive");
    if (t >= event_times.size()) throw std::out_of_range("window_spec: t out of range");
    const auto half = static_cast<std::ptrdiff_t>(length / 2);
    const auto rows = static_cast<std::ptrdiff_t>(event_times.size());
    WindowSpec w;
    w.indices.reserve(static_cast<std::size_t>(length));
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
        const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(t) + i;
        w.indices.push_back(k < 0 || k >= rows ? t : static_cast<std::size_t>(k));
    }
    const auto L = static_cast<std::size_t>(length);
    w.gap_forward.assign(L, 0.0);
    w.gap_backward.assign(L, 0.0);
    for (std::size_t i = 1; i < L; ++i) {
        // near the boundaries the substituted row can precede its left neighbour in time
        const double gap = std::abs(event_times[w.indices[i]] - event_times[w.indices[i - 1]]);
        w.gap_forward[i] = gap;
        w.gap_backward[i - 1] = gap;
    }
    return w;
}

std::array<AgentWindow, kNumAgents> build_window(const MatchData& match, const ObservationMask& mask,
                                                 const ScalerParams& scalers, const EmbeddingTables& tables,
                                                 std::size_t t, int length) {
    std::vector<double> times;
    times.reserve(match.events.size());
    for (const Event& e : match.events) times.push_back(e.t);
    const WindowSpec spec = window_spec(times, t, length);
    const ObservationIndex index(match, mask);
    const auto goal_diff = home_goal_difference(match);

    std::array<AgentWindow, kNumAgents> out;
    for (int n = 0; n < kNumAgents; ++n) {
        AgentWindow& w = out[static_cast<std::size_t>(n)];
        w.gap_forward = spec.gap_forward;
        w.gap_backward = spec.gap_backward;
        for (const std::size_t k : spec.indices) {
            w.rows.push_back(embed_and_concat(compute_agent_features(match, index, goal_diff, k, n), scalers, tables));
        }
    }
    return out;
}

EncodedMatch encode_match(const MatchData& match, std::span<const FeatureRow> rows, const ScalerParams& scalers,
                          const EmbeddingTables& tables) {
    if (rows.size() != match.events.size() * kNumAgents) {
        throw std::invalid_argument("encode_match: expected one feature row per (event, agent)");
    }
    EncodedMatch out;
    out.match_id = match.match_id;
    out.rows = match.events.size();
    out.values.resize(rows.size() * kFeatureWidth);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const FeatureVector v = embed_and_concat(rows[i], scalers, tables);
        std::copy(v.data(), v.data() + kFeatureWidth, out.values.begin() + static_cast<std::ptrdiff_t>(i * kFeatureWidth));
    }
    out.times.reserve(match.events.size());
    for (const Event& e : match.events) out.times.push_back(e.t);
    return out;
}

}  // namespace imputer
