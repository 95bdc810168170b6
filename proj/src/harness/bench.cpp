#include "imputer/harness/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "imputer/rng.hpp"

namespace imputer::harness {

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard lock(mu);
                    if (next >= count || failure) return;
                    i = next++;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

json ci_json(const MeanCI& m) { return {{"mean", m.mean}, {"ci", m.half_width}}; }
json ci_json(const MetricCI& m) { return {{"mean", m.mean}, {"ci", m.ci}}; }

MeanCI ci_of(const std::vector<double>& v) { return mean_ci(std::span<const double>(v)); }

double mean_of(std::span<const double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

void log_line(const Logger& log, const std::string& line) {
    if (log) log(line);
}

std::string format(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

std::vector<ModelKind> parse_models(const json& j) {
    std::vector<ModelKind> out;
    for (const auto& name : j) out.push_back(parse_model(name.get<std::string>()));
    return out;
}

json bench_to_json(const BenchOptions& b) {
    json models = json::array();
    for (const ModelKind k : b.models) models.push_back(std::string(model_name(k)));
    return {{"epochs", b.epochs},
            {"eval_each_epoch", b.eval_each_epoch},
            {"pitch_control_stride", b.pitch_control_stride},
            {"merge_threshold", b.merge_threshold},
            {"models", models}};
}

ModelConfig bench_model_config(const RunConfig& c) {
    ModelConfig m = c.model;
    m.epochs = c.bench.epochs;
    m.eval_each_epoch = c.bench.eval_each_epoch;
    return m;
}

}  // namespace

// ---- configuration -------------------------------------------------------------

void RunConfig::set_seed(std::uint64_t seed) {
    synth.seed = seed;
    model.seed = seed;
}

void RunConfig::validate() const {
    if (data) {
        if (!fs::is_directory(*data)) throw DataError("dataset directory not found: " + data->string());
    } else {
        synth.validate();
    }
    model.validate();
    if (bench.epochs < 0) throw std::invalid_argument("bench.epochs must be non-negative");
    if (bench.pitch_control_stride < 1) throw std::invalid_argument("bench.pitch_control_stride must be positive");
    if (bench.models.empty()) throw std::invalid_argument("bench.models is empty");
}

json run_config_to_json(const RunConfig& c) {
    return {{"data", c.data ? json(c.data->string()) : json(nullptr)},
            {"synth", io::synth_to_json(c.synth)},
            {"model", io::model_to_json(c.model)},
            {"bench", bench_to_json(c.bench)},
            {"model_kind", std::string(model_name(c.kind))},
            {"fold", c.fold},
            {"threads", c.threads}};
}

void apply_run_config(const json& j, RunConfig& c) {
    static const std::set<std::string> allowed = {"data", "synth", "model", "bench", "model_kind", "fold", "threads",
                                                  "seed"};
    if (!j.is_object()) throw DataError("config: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.contains(it.key())) throw DataError("config: unknown key '" + it.key() + "'");
    }
    try {
        if (j.contains("seed")) c.set_seed(j.at("seed").get<std::uint64_t>());
        if (j.contains("data")) {
            if (j.at("data").is_null()) {
                c.data.reset();
            } else {
                c.data = fs::path(j.at("data").get<std::string>());
            }
        }
        if (j.contains("synth")) io::apply_synth_json(j.at("synth"), c.synth);
        if (j.contains("model")) io::apply_model_json(j.at("model"), c.model);
        if (j.contains("bench")) {
            const json& b = j.at("bench");
            static const std::set<std::string> bench_keys = {"epochs", "eval_each_epoch", "pitch_control_stride",
                                                             "merge_threshold", "models"};
            for (auto it = b.begin(); it != b.end(); ++it) {
                if (!bench_keys.contains(it.key())) throw DataError("config.bench: unknown key '" + it.key() + "'");
            }
            if (b.contains("epochs")) c.bench.epochs = b.at("epochs").get<int>();
            if (b.contains("eval_each_epoch")) c.bench.eval_each_epoch = b.at("eval_each_epoch").get<bool>();
            if (b.contains("pitch_control_stride")) c.bench.pitch_control_stride = b.at("pitch_control_stride").get<std::size_t>();
            if (b.contains("merge_threshold")) c.bench.merge_threshold = b.at("merge_threshold").get<double>();
            if (b.contains("models")) c.bench.models = parse_models(b.at("models"));
        }
        if (j.contains("model_kind")) c.kind = parse_model(j.at("model_kind").get<std::string>());
        if (j.contains("fold")) c.fold = j.at("fold").get<std::size_t>();
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    } catch (const json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("config: ") + e.what());
    }
}

int resolve_threads(int requested) {
    if (const char* env = std::getenv("PITCH_IMPUTER_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw std::invalid_argument(std::string("PITCH_IMPUTER_THREADS must be a positive integer, got '") + env +
                                        "'");
        }
        return static_cast<int>(v);
    }
    return std::max(1, requested);
}

Dataset load_dataset(const RunConfig& config) {
    if (config.data) return io::read_dataset(*config.data);
    return generate_dataset(config.synth);
}

// ---- layout and manifests -----------------------------------------------------

fs::path fold_dir(const fs::path& run, ModelKind kind, std::size_t fold) {
    return run / "models" / std::string(model_name(kind)) / ("fold_" + std::to_string(fold));
}

fs::path prediction_stem(const fs::path& fold_directory, int match_id) {
    return fold_directory / "predictions" / io::match_dir_name(match_id);
}

std::string fingerprint(const json& inputs) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(io::dump_json(inputs, -1))));
    return buf;
}

bool stage_done(const fs::path& run, const std::string& stage, const std::string& fp) {
    const fs::path path = run / "manifests" / (stage + ".json");
    if (!fs::exists(path)) return false;
    try {
        const json m = io::read_json(path);
        return m.value("fingerprint", std::string()) == fp && m.value("completed", false);
    } catch (const DataError&) {
        return false;
    }
}

void mark_stage(const fs::path& run, const std::string& stage, const std::string& fp) {
    io::write_atomic(run / "manifests" / (stage + ".json"),
                     io::dump_json({{"stage", stage}, {"fingerprint", fp}, {"completed", true}}));
}

// ---- folds -----------------------------------------------------------------------

void run_fold(const Dataset& dataset, ModelKind kind, std::size_t fold, const ModelConfig& config,
              const fs::path& directory, const Logger& log) {
    if (fold >= dataset.folds.size()) throw std::out_of_range("fold index out of range");
    fs::create_directories(directory / "predictions");
    const Fold& f = dataset.folds[fold];
    if (!is_neural(kind)) {
        for (const int m : f.test) {
            const MatchData& match = dataset.matches.at(static_cast<std::size_t>(m));
            io::write_predictions(prediction_stem(directory, match.match_id), baseline_predict_match(kind, match));
        }
        return;
    }
    const std::string name(model_name(kind));
    FoldRun run = train_fold(dataset, fold, kind, config, [&](const EpochRecord& r) {
        log_line(log, format("[train] %s fold %zu epoch %d train %.4f m test %.4f m", name.c_str(), fold, r.epoch,
                             r.train_loss, r.test_loss));
    });
    io::write_atomic(directory / "history.csv", io::history_csv(run.result.history));
    const ModelConfig& used = run.model->config();
    io::write_atomic(directory / "params.bin", nn::serialize_params(run.model->params(), used.seed, name));
    const json meta = {{"model", name},
                       {"fold", fold},
                       {"config", io::model_to_json(used)},
                       {"scalers", io::scalers_to_json(run.context.scalers)}};
    io::write_atomic(directory / "model.json", io::dump_json(meta));
    for (std::size_t i = 0; i < run.predictions.size(); ++i) {
        io::write_predictions(prediction_stem(directory, run.predictions[i].match_id), run.predictions[i]);
    }
}

std::vector<PredictionSet> load_fold_predictions(const Dataset& dataset, std::size_t fold,
                                                 const fs::path& directory) {
    std::vector<PredictionSet> out;
    for (const int m : dataset.folds.at(fold).test) {
        PredictionSet set = io::read_predictions(prediction_stem(directory, m));
        if (set.match_id != m || set.size() != dataset.matches.at(static_cast<std::size_t>(m)).events.size()) {
            throw DataError("predictions under " + directory.string() + " do not match the dataset");
        }
        out.push_back(std::move(set));
    }
    return out;
}

// ---- evaluation ----------------------------------------------------------------

namespace {

std::vector<std::size_t> available_folds(const Dataset& dataset, ModelKind kind, const fs::path& run) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < dataset.folds.size(); ++k) {
        if (fs::is_directory(fold_dir(run, kind, k) / "predictions")) out.push_back(k);
    }
    if (out.empty()) throw DataError("no predictions for " + std::string(model_name(kind)) + " under " + run.string());
    return out;
}

}  // namespace

json half_ttests(std::span<const ErrorRecord> records) {
    struct Window {
        const char* name;
        int period;
        double a0, a1, b0, b1;  // minutes on the match clock
    };
    static const Window windows[] = {{"first_half", 1, 20.0, 25.0, 42.5, 47.5},
                                     {"second_half", 2, 65.0, 70.0, 87.5, 92.5}};
    json out;
    for (const Window& w : windows) {
        std::vector<double> a, b;
        for (const ErrorRecord& r : records) {
            if (r.period != w.period) continue;
            const double m = r.clock / 60.0;
            if (m >= w.a0 && m <= w.a1) a.push_back(r.xy_err);
            if (m >= w.b0 && m <= w.b1) b.push_back(r.xy_err);
        }
        json entry = {{"middle_minutes", {w.a0, w.a1}},
                      {"end_minutes", {w.b0, w.b1}},
                      {"n_middle", a.size()},
                      {"n_end", b.size()},
                      {"mean_middle", mean_of(a)},
                      {"mean_end", mean_of(b)}};
        if (a.size() >= 2 && b.size() >= 2) {
            const TTestResult t = welch_ttest_one_sided(a, b);
            entry["t"] = t.t;
            entry["dof"] = t.dof;
            entry["p"] = t.p;
        } else {
            entry["t"] = nullptr;
            entry["dof"] = nullptr;
            entry["p"] = nullptr;
        }
        out[w.name] = entry;
    }
    return out;
}

json evaluate_model(const Dataset& dataset, ModelKind kind, const fs::path& run, const fs::path& metrics_dir) {
    std::vector<ErrorRecord> all;
    std::vector<PositionalError> per_fold;
    json folds = json::array();
    for (const std::size_t k : available_folds(dataset, kind, run)) {
        std::vector<ErrorRecord> fold_records;
        for (const PredictionSet& set : load_fold_predictions(dataset, k, fold_dir(run, kind, k))) {
            const auto recs = error_records(set, dataset.matches.at(static_cast<std::size_t>(set.match_id)));
            fold_records.insert(fold_records.end(), recs.begin(), recs.end());
        }
        const PositionalError e = positional_errors(fold_records);
        per_fold.push_back(e);
        folds.push_back({{"fold", k}, {"x", e.x}, {"y", e.y}, {"xy", e.xy}, {"count", e.count}});
        all.insert(all.end(), fold_records.begin(), fold_records.end());
    }
    const PositionalSummary s = summarize_folds(per_fold);

    json roles;
    const auto by_role = error_by_role(all);
    for (int g = 0; g < kNumRoleGroups; ++g) {
        const GroupError& ge = by_role[static_cast<std::size_t>(g)];
        if (!ge.present) continue;
        roles[std::string(role_group_name(static_cast<RoleGroup>(g)))] = {
            {"x", ge.error.x}, {"y", ge.error.y}, {"xy", ge.error.xy}, {"count", ge.error.count}};
    }

    const auto since = error_by_offset(all, OffsetDirection::since);
    const auto until = error_by_offset(all, OffsetDirection::until);
    auto bucket = [](const std::vector<OffsetPoint>& pts, double label) -> json {
        for (const OffsetPoint& p : pts) {
            if (p.label == label) return {{"mean_xy", p.mean_xy}, {"count", p.count}};
        }
        return nullptr;
    };

    fs::create_directories(metrics_dir);
    io::write_atomic(metrics_dir / "rolling_error.csv", io::rolling_csv(rolling_error(all)));
    io::write_atomic(metrics_dir / "offset_since.csv", io::offset_csv(since));
    io::write_atomic(metrics_dir / "offset_until.csv", io::offset_csv(until));

    json metrics = {{"model", std::string(model_name(kind))},
                    {"test_error", {{"x", ci_json(s.x)}, {"y", ci_json(s.y)}, {"xy", ci_json(s.xy)}}},
                    {"per_fold", folds},
                    {"by_role", roles},
                    {"offset_since", {{"0-1s", bucket(since, 1.0)}, {"10-11s", bucket(since, 11.0)}}},
                    {"offset_until", {{"0-1s", bucket(until, 1.0)}, {"10-11s", bucket(until, 11.0)}}},
                    {"ttests", half_ttests(all)}};
    io::write_atomic(metrics_dir / "metrics.json", io::dump_json(metrics));
    return metrics;
}

json apps_model(const Dataset& dataset, ModelKind kind, const fs::path& run, const BenchOptions& options) {
    std::vector<double> pc_fold;
    std::vector<double> err_merged, err_unmerged, truth_km, merged_km, unmerged_km;
    std::size_t merge_violations = 0;
    std::vector<double> bc_model, bc_uniform;
    const Heatmap uniform = uniform_heatmap();

    for (const std::size_t k : available_folds(dataset, kind, run)) {
        std::vector<double> fold_pc;
        for (const PredictionSet& set : load_fold_predictions(dataset, k, fold_dir(run, kind, k))) {
            const MatchData& match = dataset.matches.at(static_cast<std::size_t>(set.match_id));
            const auto pc = pitch_control_errors(set, match, PitchControlParams{}, options.pitch_control_stride);
            fold_pc.insert(fold_pc.end(), pc.begin(), pc.end());

            const auto truth = distance_covered(match);
            const auto unmerged = distance_covered(set, match.roster);
            const auto merged = distance_covered(merge_rapid_events(set, options.merge_threshold), match.roster);
            for (std::size_t i = 0; i < truth.size(); ++i) {
                if (!truth[i].included) continue;
                truth_km.push_back(truth[i].km_per90);
                merged_km.push_back(merged[i].km_per90);
                unmerged_km.push_back(unmerged[i].km_per90);
                err_merged.push_back(std::abs(merged[i].km_per90 - truth[i].km_per90));
                err_unmerged.push_back(std::abs(unmerged[i].km_per90 - truth[i].km_per90));
                if (merged[i].km > unmerged[i].km + 1e-9) ++merge_violations;
            }

            for (const RosterEntry& r : match.roster) {
                const AgentTrack truth_track = agent_track_truth(match, r.agent_id);
                const Heatmap truth_map = heatmap(truth_track.positions, truth_track.directions);
                const AgentTrack pred_track = agent_track(set, match, r.agent_id);
                bc_model.push_back(bhattacharyya(heatmap(pred_track.positions, pred_track.directions), truth_map));
                bc_uniform.push_back(bhattacharyya(uniform, truth_map));
            }
        }
        pc_fold.push_back(mean_of(fold_pc));
    }
    return {{"model", std::string(model_name(kind))},
            {"pitch_control_mae", ci_json(ci_of(pc_fold))},
            {"pitch_control_per_fold", pc_fold},
            {"distance",
             {{"players", truth_km.size()},
              {"truth_km_per90", mean_of(truth_km)},
              {"unmerged_km_per90", mean_of(unmerged_km)},
              {"merged_km_per90", mean_of(merged_km)},
              {"unmerged_abs_error", mean_of(err_unmerged)},
              {"merged_abs_error", mean_of(err_merged)},
              {"merged_exceeds_unmerged", merge_violations}}},
            {"heatmap", {{"bhattacharyya", mean_of(bc_model)}, {"uniform_bhattacharyya", mean_of(bc_uniform)}}}};
}

// ---- full pipeline ----------------------------------------------------------------

json run_bench(const RunConfig& config, const fs::path& out, const Logger& log) {
    config.validate();
    fs::create_directories(out);
    io::write_atomic(out / "config.json", io::dump_json(run_config_to_json(config)));

    // synth
    const json data_inputs = config.data ? json{{"data", config.data->string()}} : io::synth_to_json(config.synth);
    const std::string data_fp = fingerprint(data_inputs);
    const fs::path data_dir = config.data ? *config.data : out / "data";
    Dataset dataset;
    if (config.data) {
        dataset = io::read_dataset(data_dir);
    } else if (stage_done(out, "synth", data_fp)) {
        log_line(log, "[synth] reusing " + data_dir.string());
        dataset = io::read_dataset(data_dir);
    } else {
        log_line(log, format("[synth] generating %d matches", config.synth.n_matches));
        dataset = generate_dataset(config.synth);
        io::write_dataset(data_dir, dataset);
        mark_stage(out, "synth", data_fp);
    }

    // train / predict
    const ModelConfig model_cfg = bench_model_config(config);
    struct Job {
        ModelKind kind;
        std::size_t fold;
        std::string stage;
        std::string fp;
    };
    std::vector<Job> jobs;
    std::map<ModelKind, std::vector<std::string>> fold_fps;
    for (const ModelKind kind : config.bench.models) {
        for (std::size_t k = 0; k < dataset.folds.size(); ++k) {
            json inputs = {{"data", data_fp}, {"model", std::string(model_name(kind))}, {"fold", k}};
            if (is_neural(kind)) inputs["config"] = io::model_to_json(model_cfg);
            const std::string fp = fingerprint(inputs);
            fold_fps[kind].push_back(fp);
            const std::string stage = "train." + std::string(model_name(kind)) + ".fold" + std::to_string(k);
            if (stage_done(out, stage, fp)) {
                log_line(log, "[train] reusing " + stage);
                continue;
            }
            jobs.push_back({kind, k, stage, fp});
        }
    }
    parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        log_line(log, "[train] " + job.stage);
        run_fold(dataset, job.kind, job.fold, model_cfg, fold_dir(out, job.kind, job.fold), log);
        mark_stage(out, job.stage, job.fp);
    });

    // evaluate + apps
    json report_models;
    for (const ModelKind kind : config.bench.models) {
        const std::string name(model_name(kind));
        const fs::path metrics_dir = out / "metrics" / name;
        const std::string eval_fp = fingerprint({{"folds", fold_fps[kind]}});
        json metrics;
        if (stage_done(out, "evaluate." + name, eval_fp)) {
            metrics = io::read_json(metrics_dir / "metrics.json");
        } else {
            log_line(log, "[evaluate] " + name);
            metrics = evaluate_model(dataset, kind, out, metrics_dir);
            mark_stage(out, "evaluate." + name, eval_fp);
        }
        const std::string apps_fp = fingerprint({{"folds", fold_fps[kind]}, {"bench", bench_to_json(config.bench)}});
        json apps;
        if (stage_done(out, "apps." + name, apps_fp)) {
            apps = io::read_json(metrics_dir / "apps.json");
        } else {
            log_line(log, "[apps] " + name);
            apps = apps_model(dataset, kind, out, config.bench);
            io::write_atomic(metrics_dir / "apps.json", io::dump_json(apps));
            mark_stage(out, "apps." + name, apps_fp);
        }
        json entry = metrics;
        entry.erase("model");
        for (auto it = apps.begin(); it != apps.end(); ++it) {
            if (it.key() != "model") entry[it.key()] = it.value();
        }
        for (std::size_t k = 0; k < dataset.folds.size() && is_neural(kind); ++k) {
            const fs::path hist = fold_dir(out, kind, k) / "history.csv";
            entry["history_files"].push_back(fs::relative(hist, out).generic_string());
        }
        report_models[name] = entry;
    }

    // report
    std::vector<std::pair<double, std::string>> ranked;
    for (auto it = report_models.begin(); it != report_models.end(); ++it) {
        ranked.emplace_back(it.value()["test_error"]["xy"]["mean"].get<double>(), it.key());
    }
    std::sort(ranked.begin(), ranked.end());
    json ordering = json::array();
    for (const auto& [xy, name] : ranked) ordering.push_back(name);

    json summary;
    double best_baseline = std::numeric_limits<double>::infinity();
    std::string best_name;
    for (const ModelKind k : {ModelKind::baseline1, ModelKind::baseline2, ModelKind::baseline3}) {
        const std::string name(model_name(k));
        if (!report_models.contains(name)) continue;
        const double xy = report_models[name]["test_error"]["xy"]["mean"].get<double>();
        if (xy < best_baseline) {
            best_baseline = xy;
            best_name = name;
        }
    }
    if (!best_name.empty() && report_models.contains("agent_imputer")) {
        const double ai = report_models["agent_imputer"]["test_error"]["xy"]["mean"].get<double>();
        summary["best_baseline"] = best_name;
        summary["agent_imputer_xy"] = ai;
        summary["best_baseline_xy"] = best_baseline;
        summary["relative_reduction"] = 1.0 - ai / best_baseline;
    }

    json report = {{"schema", "pitch-imputer-report"},
                   {"version", kReportVersion},
                   {"config", run_config_to_json(config)},
                   {"dataset", {{"matches", dataset.matches.size()}, {"folds", dataset.folds.size()}}},
                   {"models", report_models},
                   {"ordering_by_xy", ordering},
                   {"summary", summary}};
    io::write_atomic(out / "report.json", io::dump_json(report));
    log_line(log, "[report] " + (out / "report.json").string());
    return report;
}

}  // namespace imputer::harness
