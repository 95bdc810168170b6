#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "imputer/domain.hpp"
#include "imputer/eval.hpp"
#include "imputer/features.hpp"
#include "imputer/models.hpp"
#include "imputer/synthgen.hpp"

namespace imputer::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// JSON text with every floating-point number printed to 17 significant
/// digits; non-finite numbers become null.
std::string dump_json(const json& value, int indent = 2);

/// Write to a sibling temp file, then rename over `path`.
void write_atomic(const fs::path& path, const std::string& bytes);
void write_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_text(const fs::path& path);
std::vector<std::uint8_t> read_bytes(const fs::path& path);
json read_json(const fs::path& path);

// ---- match data: events.jsonl, tracking.jsonl, roster.json --------------------------

void write_match(const fs::path& dir, const MatchData& match);
MatchData read_match(const fs::path& dir);

/// One match_<id> directory per match plus folds.json.
void write_dataset(const fs::path& dir, const Dataset& dataset);
Dataset read_dataset(const fs::path& dir);
std::string match_dir_name(int match_id);

json folds_to_json(const std::vector<Fold>& folds);
std::vector<Fold> folds_from_json(const json& j);

// ---- predictions: <stem>.f64 ([t][n][x,y] little-endian) + <stem>.json --------------

void write_predictions(const fs::path& stem, const PredictionSet& set);
PredictionSet read_predictions(const fs::path& stem);

/// Flat tensor + sidecar describing shape and dtype.
void write_tensor_f32(const fs::path& stem, const std::vector<double>& values, const std::vector<std::size_t>& shape,
                      const json& extra);

// ---- training artefacts ----------------------------------------------------------

std::string history_csv(const std::vector<EpochRecord>& history);
json scalers_to_json(const ScalerParams& s);
ScalerParams scalers_from_json(const json& j);

// ---- configuration ---------------------------------------------------------------

json synth_to_json(const SynthConfig& c);
/// Applies the keys present in `j`; unknown keys raise DataError.
void apply_synth_json(const json& j, SynthConfig& c);
json model_to_json(const ModelConfig& c);
void apply_model_json(const json& j, ModelConfig& c);

// ---- curves ----------------------------------------------------------------------

std::string rolling_csv(const RollingSeries& s);
std::string offset_csv(const std::vector<OffsetPoint>& points);
std::string grid_csv(const std::vector<double>& cells, int nx, int ny);

/// Exit-code mapping shared by the CLI.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

}  // namespace imputer::io
