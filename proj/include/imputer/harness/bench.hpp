#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "imputer/apps.hpp"
#include "imputer/harness/io.hpp"

namespace imputer::harness {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kReportVersion = 1;

struct BenchOptions {
    int epochs = 8;  // overrides model.epochs for the neural runs
    bool eval_each_epoch = false;
    std::size_t pitch_control_stride = 10;
    double merge_threshold = 1.0;
    std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
};

struct RunConfig {
    std::optional<fs::path> data;  // read a dataset instead of synthesizing one
    SynthConfig synth;
    ModelConfig model;
    BenchOptions bench;
    ModelKind kind = ModelKind::agent_imputer;
    std::size_t fold = 0;
    int threads = 1;

    /// Root seed shared by the generator and the model.
    void set_seed(std::uint64_t seed);
    void validate() const;
};

json run_config_to_json(const RunConfig& c);
/// Keys present in `j` override `c`; unknown keys raise DataError.
void apply_run_config(const json& j, RunConfig& c);

/// --threads, overridden by PITCH_IMPUTER_THREADS when set.
int resolve_threads(int requested);

/// Loads `config.data` or generates the synthetic dataset.
Dataset load_dataset(const RunConfig& config);

// ---- run directory layout ------------------------------------------------------------

fs::path fold_dir(const fs::path& run, ModelKind kind, std::size_t fold);
fs::path prediction_stem(const fs::path& fold_directory, int match_id);

/// Stage manifest keyed by a fingerprint of the inputs that produced it.
bool stage_done(const fs::path& run, const std::string& stage, const std::string& fingerprint);
void mark_stage(const fs::path& run, const std::string& stage, const std::string& fingerprint);
std::string fingerprint(const json& inputs);

using Logger = std::function<void(const std::string&)>;

/// Trains (neural) or evaluates (baseline) one fold and writes its
/// predictions, plus history.csv, params.bin and model.json for neural kinds.
void run_fold(const Dataset& dataset, ModelKind kind, std::size_t fold, const ModelConfig& config,
              const fs::path& directory, const Logger& log = {});

std::vector<PredictionSet> load_fold_predictions(const Dataset& dataset, std::size_t fold,
                                                 const fs::path& directory);

/// Error table, curves and per-role errors for one model; CSVs go to `metrics_dir`.
json evaluate_model(const Dataset& dataset, ModelKind kind, const fs::path& run, const fs::path& metrics_dir);

/// Pitch control, distance covered and heatmaps for one model.
json apps_model(const Dataset& dataset, ModelKind kind, const fs::path& run, const BenchOptions& options);

/// Middle-of-half vs end-of-half comparisons on the match clock.
json half_ttests(std::span<const ErrorRecord> records);

/// synth -> train every model -> evaluate -> apps -> report.json
json run_bench(const RunConfig& config, const fs::path& out, const Logger& log = {});

}  // namespace imputer::harness
