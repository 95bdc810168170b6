#pragma once

#include <array>
#include <map>
#include <span>
#include <vector>

#include "imputer/domain.hpp"

namespace imputer {

struct ErrorRecord {
    int match_id = 0;
    double t = 0.0;      // seconds from kickoff
    double clock = 0.0;  // 90-minute match clock
    int period = 1;
    int agent_id = 0;
    RoleGroup role_group = RoleGroup::goalkeeper;
    double x_err = 0.0;
    double y_err = 0.0;
    double xy_err = 0.0;
    double time_since_obs = 0.0;  // NaN before the agent's first observation
    double time_until_obs = 0.0;  // NaN after the last one
};

/// One record per (event, agent), comparing raw model output with tracking.
std::vector<ErrorRecord> error_records(const PredictionSet& predictions, const MatchData& match);

struct PositionalError {
    double x = 0.0;
    double y = 0.0;
    double xy = 0.0;
    std::size_t count = 0;
};

PositionalError positional_errors(std::span<const ErrorRecord> records);

struct MetricCI {
    double mean = 0.0;
    double ci = 0.0;  // 1.96 * sample sd / sqrt(k)
};

struct PositionalSummary {
    MetricCI x, y, xy;
};

/// Aggregates per-fold errors into mean +- CI over folds.
PositionalSummary summarize_folds(std::span<const PositionalError> folds);

struct RollingSeries {
    std::vector<double> t;  // window end on the match clock
    std::vector<double> mean;
    std::vector<double> sigma;  // across matches; 0 for a single match
    std::vector<int> matches;
};

/// Trailing window (t - window, t] sampled every `step` seconds on the match
/// clock; windows without records are omitted.
RollingSeries rolling_error(std::span<const ErrorRecord> records, double window = 300.0, double step = 1.0);

/// Per-match series keyed by match id.
std::map<int, RollingSeries> rolling_error_by_match(std::span<const ErrorRecord> records, double window = 300.0,
                                                    double step = 1.0);

struct GroupError {
    PositionalError error;
    bool present = false;
};

std::array<GroupError, kNumRoleGroups> error_by_role(std::span<const ErrorRecord> records);

enum class OffsetDirection { since, until };

struct OffsetPoint {
    double label = 0.0;  // bucket upper edge: [k*b, (k+1)*b) is labelled (k+1)*b
    double mean_xy = 0.0;
    std::size_t count = 0;
};

std::vector<OffsetPoint> error_by_offset(std::span<const ErrorRecord> records, OffsetDirection direction,
                                         double bucket = 1.0);

struct TTestResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 0.0;
};

/// Welch t-test of H1: mean(a) < mean(b).
TTestResult welch_ttest_one_sided(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

}  // namespace imputer
