#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "imputer/domain.hpp"
#include "imputer/rng.hpp"

namespace imputer {

inline constexpr int kNumNumericFeatures = 10;
inline constexpr int kNumCategoricalFeatures = 5;
inline constexpr int kGoalDiffLimit = 4;
inline constexpr int kGoalDiffClasses = 2 * kGoalDiffLimit + 1;
inline constexpr int kFeatureWidth = 24;
inline constexpr int kDefaultWindow = 5;

/// Per-agent, per-event features. Spatial values are in the agent's own-goal frame.
struct FeatureRow {
    double prev_agent_time = 0.0;
    double next_agent_time = 0.0;
    double prev_agent_x = 0.0;
    double prev_agent_y = 0.0;
    double next_agent_x = 0.0;
    double next_agent_y = 0.0;
    double av_agent_x = 0.0;
    double av_agent_y = 0.0;
    double event_x = 0.0;
    double event_y = 0.0;

    Role agent_role = Role::goalkeeper;
    int agent_side = 0;
    int agent_observed = 0;
    int goal_diff = 0;  // clamped to [-4, 4]
    EventType event_type = EventType::pass;

    std::array<double, kNumNumericFeatures> numeric() const {
        return {prev_agent_time, next_agent_time, prev_agent_x, prev_agent_y, next_agent_x,
                next_agent_y,    av_agent_x,      av_agent_y,   event_x,      event_y};
    }
};

// Positions of each numeric feature inside FeatureRow::numeric().
inline constexpr std::array<int, 2> kTimeFeatures = {0, 1};
inline constexpr std::array<int, 4> kXFeatures = {2, 4, 6, 8};
inline constexpr std::array<int, 4> kYFeatures = {3, 5, 7, 9};

/// Observation bookkeeping for one match: for every (t, n) the nearest observed
/// event at or before t and at or after t.
class ObservationIndex {
public:
    ObservationIndex(const MatchData& match, const ObservationMask& mask);

    static constexpr std::int32_t kNone = -1;

    std::int32_t prev(std::size_t t, int n) const { return prev_[t * kNumAgents + static_cast<std::size_t>(n)]; }
    std::int32_t next(std::size_t t, int n) const { return next_[t * kNumAgents + static_cast<std::size_t>(n)]; }
    std::int32_t first(int n) const { return first_[static_cast<std::size_t>(n)]; }
    std::int32_t last(int n) const { return last_[static_cast<std::size_t>(n)]; }
    Point mean_own_location(int n) const { return mean_own_[static_cast<std::size_t>(n)]; }
    Point own_location(std::size_t t, int n) const;
    std::size_t rows() const { return rows_; }

private:
    const MatchData* match_;
    std::size_t rows_ = 0;
    std::vector<std::int32_t> prev_;
    std::vector<std::int32_t> next_;
    std::array<std::int32_t, kNumAgents> first_{};
    std::array<std::int32_t, kNumAgents> last_{};
    std::array<Point, kNumAgents> mean_own_{};
};

/// Goal difference before each event, from the home team's perspective.
std::vector<int> home_goal_difference(const MatchData& match);

FeatureRow compute_agent_features(const MatchData& match, const ObservationIndex& index,
                                  std::span<const int> home_goal_diff, std::size_t t, int n);

/// Convenience overload; builds the index for a single query.
FeatureRow compute_agent_features(const MatchData& match, const ObservationMask& mask, std::size_t t, int n);

/// All rows of a match, laid out [t][n].
std::vector<FeatureRow> compute_match_features(const MatchData& match, const ObservationMask& mask);

struct ScalerParams {
    double x_min = 0.0;
    double x_max = kPitchLength;
    double y_min = 0.0;
    double y_max = kPitchWidth;
    double time_median = 0.0;
    double time_iqr = 1.0;

    double scale_x(double v) const { return (v - x_min) / (x_max - x_min); }
    double scale_y(double v) const { return (v - y_min) / (y_max - y_min); }
    double scale_time(double v) const { return (v - time_median) / time_iqr; }
    double inverse_x(double v) const { return x_min + v * (x_max - x_min); }
    double inverse_y(double v) const { return y_min + v * (y_max - y_min); }
};

/// Linear-interpolated quantile (q in [0, 1]); reorders `values`.
double quantile(std::vector<double>& values, double q);

ScalerParams fit_scalers(std::span<const FeatureRow> train_rows);

std::array<double, kNumNumericFeatures> apply_scalers(const FeatureRow& row, const ScalerParams& params);

/// Fixed random embeddings for the five categorical features.
struct EmbeddingTables {
    // order: agentRole, eventType, agentSide, agentObserved, goalDiff
    std::array<Eigen::MatrixXd, kNumCategoricalFeatures> tables;

    static constexpr std::array<int, kNumCategoricalFeatures> kClasses = {kNumRoles, kNumEventTypes, 2, 2,
                                                                         kGoalDiffClasses};
    static int dim_for(int classes);
    static EmbeddingTables generate(const SeedTree& seeds);
    int total_dim() const;
};

using FeatureVector = Eigen::Matrix<double, kFeatureWidth, 1>;

FeatureVector embed_and_concat(const FeatureRow& row, const ScalerParams& scalers, const EmbeddingTables& tables);

/// Event indices {t-h..t+h} with out-of-range entries replaced by t, plus the
/// forward and backward time gaps (absolute seconds) between consecutive window entries.
struct WindowSpec {
    std::vector<std::size_t> indices;
    std::vector<double> gap_forward;
    std::vector<double> gap_backward;
};

WindowSpec window_spec(std::span<const double> event_times, std::size_t t, int length);

struct AgentWindow {
    std::vector<FeatureVector> rows;
    std::vector<double> gap_forward;
    std::vector<double> gap_backward;
};

/// Model-ready windows for every agent at event t.
std::array<AgentWindow, kNumAgents> build_window(const MatchData& match, const ObservationMask& mask,
                                                 const ScalerParams& scalers, const EmbeddingTables& tables,
                                                 std::size_t t, int length);

/// Embedded features of a whole match, [t][n][k] contiguous.
struct EncodedMatch {
    int match_id = 0;
    std::size_t rows = 0;
    std::vector<double> values;
    std::vector<double> times;

    const double* row(std::size_t t, int n) const {
        return values.data() + (t * kNumAgents + static_cast<std::size_t>(n)) * kFeatureWidth;
    }
};

EncodedMatch encode_match(const MatchData& match, std::span<const FeatureRow> rows, const ScalerParams& scalers,
                          const EmbeddingTables& tables);

}  // namespace imputer
