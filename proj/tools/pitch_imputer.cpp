// pitch_imputer: command-line front end for the imputation pipeline.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "imputer/harness/bench.hpp"

namespace fs = std::filesystem;
using namespace imputer;
using harness::json;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out;
    std::string data;
};

harness::RunConfig make_config(const Globals& g) {
    harness::RunConfig c;
    if (!g.config_path.empty()) harness::apply_run_config(io::read_json(g.config_path), c);
    if (g.seed) c.set_seed(*g.seed);
    if (!g.data.empty()) c.data = fs::path(g.data);
    c.threads = harness::resolve_threads(g.threads);
    return c;
}

fs::path require_out(const Globals& g, const char* what) {
    if (g.out.empty()) throw CLI::ValidationError("--out", std::string(what) + " needs --out");
    return g.out;
}

std::mutex log_mu;
void log_stderr(const std::string& line) {
    std::lock_guard lock(log_mu);
    std::cerr << line << '\n';
}

PredictionSet load_or_fail(const std::string& stem) {
    if (stem.empty()) throw CLI::ValidationError("--predictions", "a prediction stem is required");
    return io::read_predictions(stem);
}

const MatchData& find_match(const Dataset& ds, int match_id) {
    if (match_id < 0 || match_id >= static_cast<int>(ds.matches.size())) {
        throw DataError("match " + std::to_string(match_id) + " is not in the dataset");
    }
    return ds.matches[static_cast<std::size_t>(match_id)];
}

// ---- subcommands ---------------------------------------------------------------

int cmd_synth(const Globals& g) {
    harness::RunConfig c = make_config(g);
    c.synth.validate();
    const fs::path out = require_out(g, "synth");
    const Dataset ds = generate_dataset(c.synth);
    io::write_dataset(out, ds);
    std::size_t events = 0;
    for (const MatchData& m : ds.matches) events += m.events.size();
    std::printf("wrote %zu matches (%zu events) to %s\n", ds.matches.size(), events, out.string().c_str());
    return io::kExitOk;
}

int cmd_featurize(const Globals& g, std::size_t fold) {
    harness::RunConfig c = make_config(g);
    const fs::path out = require_out(g, "featurize");
    const Dataset ds = harness::load_dataset(c);
    if (fold >= ds.folds.size()) throw CLI::ValidationError("--fold", "fold index out of range");
    ModelConfig mc = c.model;
    mc.seed = fold_seed(c.model.seed, fold);
    const FoldContext ctx = prepare_fold(ds, ds.folds[fold], mc);
    io::write_atomic(out / "scalers.json", io::dump_json(io::scalers_to_json(ctx.scalers)));
    auto dump = [&](const std::vector<PreparedMatch>& split, const char* name) {
        for (const PreparedMatch& pm : split) {
            const EncodedMatch& e = pm.encoded;
            io::write_tensor_f32(out / io::match_dir_name(e.match_id), e.values, {e.rows, kNumAgents, kFeatureWidth},
                                 {{"match_id", e.match_id}, {"split", name}, {"fold", fold},
                                  {"observed_agent", pm.mask.observed_agents()}});
        }
    };
    dump(ctx.train, "train");
    dump(ctx.test, "test");
    std::printf("wrote features for %zu matches to %s\n", ctx.train.size() + ctx.test.size(), out.string().c_str());
    return io::kExitOk;
}

int cmd_train(const Globals& g, const std::string& model, std::optional<std::size_t> fold) {
    harness::RunConfig c = make_config(g);
    if (!model.empty()) c.kind = parse_model(model);
    if (fold) c.fold = *fold;
    c.model.validate();
    const fs::path out = require_out(g, "train");
    const Dataset ds = harness::load_dataset(c);
    const fs::path dir = harness::fold_dir(out, c.kind, c.fold);
    harness::run_fold(ds, c.kind, c.fold, c.model, dir, log_stderr);
    std::printf("%s fold %zu -> %s\n", std::string(model_name(c.kind)).c_str(), c.fold, dir.string().c_str());
    return io::kExitOk;
}

int cmd_evaluate(const Globals& g, const std::string& run_arg, const std::vector<std::string>& models) {
    harness::RunConfig c = make_config(g);
    const fs::path run = run_arg.empty() ? require_out(g, "evaluate") : fs::path(run_arg);
    const Dataset ds = harness::load_dataset(c);
    std::vector<ModelKind> kinds;
    for (const std::string& m : models) kinds.push_back(parse_model(m));
    if (kinds.empty()) {
        for (const ModelKind k : kAllModels) {
            if (fs::is_directory(run / "models" / std::string(model_name(k)))) kinds.push_back(k);
        }
    }
    if (kinds.empty()) throw DataError("no model outputs under " + (run / "models").string());
    json table;
    std::printf("%-14s %18s %18s %18s\n", "model", "X (m)", "Y (m)", "XY (m)");
    for (const ModelKind k : kinds) {
        const std::string name(model_name(k));
        const json m = harness::evaluate_model(ds, k, run, run / "metrics" / name);
        table[name] = m;
        const json& e = m["test_error"];
        std::printf("%-14s %9.3f +- %5.3f %9.3f +- %5.3f %9.3f +- %5.3f\n", name.c_str(), e["x"]["mean"].get<double>(),
                    e["x"]["ci"].get<double>(), e["y"]["mean"].get<double>(), e["y"]["ci"].get<double>(),
                    e["xy"]["mean"].get<double>(), e["xy"]["ci"].get<double>());
    }
    io::write_atomic(run / "evaluation.json", io::dump_json({{"version", harness::kReportVersion}, {"models", table}}));
    return io::kExitOk;
}

int cmd_impute(const Globals& g, const std::string& fold_directory, const std::string& model, int match_id) {
    harness::RunConfig c = make_config(g);
    const fs::path out = require_out(g, "impute");
    const Dataset ds = harness::load_dataset(c);
    const MatchData& match = find_match(ds, match_id);
    PredictionSet set;
    if (!model.empty() && !is_neural(parse_model(model))) {
        set = baseline_predict_match(parse_model(model), match);
    } else {
        if (fold_directory.empty()) throw CLI::ValidationError("--fold-dir", "neural models need a trained fold directory");
        const fs::path dir(fold_directory);
        const json meta = io::read_json(dir / "model.json");
        const ModelKind kind = parse_model(meta.at("model").get<std::string>());
        ModelConfig mc;
        io::apply_model_json(meta.at("config"), mc);
        NeuralImputer net(kind, mc);
        const nn::BlobHeader header = nn::deserialize_params(io::read_bytes(dir / "params.bin"), net.params());
        const ScalerParams scalers = io::scalers_from_json(meta.at("scalers"));
        const EmbeddingTables tables = EmbeddingTables::generate(SeedTree(header.seed).child("embeddings"));
        set = predict(net, prepare_match(match, scalers, tables), scalers);
    }
    io::write_predictions(out, set);
    std::printf("wrote %zu x %d predictions to %s.f64\n", set.size(), kNumAgents, out.string().c_str());
    return io::kExitOk;
}

int cmd_apps_distance(const Globals& g, const std::string& stem, double threshold) {
    harness::RunConfig c = make_config(g);
    const fs::path out = require_out(g, "apps distance");
    const Dataset ds = harness::load_dataset(c);
    const PredictionSet set = load_or_fail(stem);
    const MatchData& match = find_match(ds, set.match_id);
    const auto truth = distance_covered(match);
    const auto unmerged = distance_covered(set, match.roster);
    const auto merged = distance_covered(merge_rapid_events(set, threshold), match.roster);
    std::string csv = "agent_id,role,minutes_played,included,truth_km_per90,unmerged_km_per90,merged_km_per90\n";
    char buf[256];
    for (std::size_t i = 0; i < truth.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%d,%.17g,%.17g,%.17g\n", truth[i].agent_id,
                      std::string(role_name(truth[i].role)).c_str(), truth[i].minutes_played,
                      truth[i].included ? 1 : 0, truth[i].km_per90, unmerged[i].km_per90, merged[i].km_per90);
        csv += buf;
    }
    io::write_atomic(out, csv);
    std::printf("wrote distance covered for %zu players to %s\n", truth.size(), out.string().c_str());
    return io::kExitOk;
}

int cmd_apps_pitchcontrol(const Globals& g, const std::string& stem, std::size_t event, std::size_t stride) {
    harness::RunConfig c = make_config(g);
    const fs::path out = require_out(g, "apps pitchcontrol");
    const Dataset ds = harness::load_dataset(c);
    const PredictionSet set = load_or_fail(stem);
    const MatchData& match = find_match(ds, set.match_id);
    if (event >= set.size()) throw CLI::ValidationError("--event", "event index out of range");
    const auto resolved = set.resolved();
    const auto truth = align_events_to_tracking(match.events, match.tracking);
    const Team attacking = match.events[event].team;
    const PitchGrid pred = pitch_control(resolved[event], match.roster, attacking);
    const PitchGrid real = pitch_control(truth[event], match.roster, attacking);
    fs::create_directories(out);
    io::write_atomic(out / "predicted.csv", io::grid_csv(pred.cells, pred.nx, pred.ny));
    io::write_atomic(out / "truth.csv", io::grid_csv(real.cells, real.nx, real.ny));
    const auto errors = pitch_control_errors(set, match, PitchControlParams{}, stride);
    double mean = 0.0;
    for (const double e : errors) mean += e;
    mean /= static_cast<double>(std::max<std::size_t>(1, errors.size()));
    io::write_atomic(out / "summary.json", io::dump_json({{"match_id", set.match_id},
                                                          {"event", event},
                                                          {"event_mae", pitch_control_mae(std::span(&pred, 1),
                                                                                          std::span(&real, 1))},
                                                          {"match_mae", mean},
                                                          {"events_scored", errors.size()},
                                                          {"stride", stride}}));
    std::printf("pitch-control MAE %.4f over %zu events\n", mean, errors.size());
    return io::kExitOk;
}

int cmd_apps_heatmap(const Globals& g, const std::string& stem, int agent) {
    harness::RunConfig c = make_config(g);
    const fs::path out = require_out(g, "apps heatmap");
    const Dataset ds = harness::load_dataset(c);
    const PredictionSet set = load_or_fail(stem);
    const MatchData& match = find_match(ds, set.match_id);
    if (agent < 0 || agent >= kNumAgents) throw CLI::ValidationError("--agent", "agent id out of range");
    const AgentTrack pt = agent_track(set, match, agent);
    const AgentTrack tt = agent_track_truth(match, agent);
    const Heatmap pred = heatmap(pt.positions, pt.directions);
    const Heatmap real = heatmap(tt.positions, tt.directions);
    fs::create_directories(out);
    io::write_atomic(out / "predicted.csv", io::grid_csv(pred.density, pred.nx, pred.ny));
    io::write_atomic(out / "truth.csv", io::grid_csv(real.density, real.nx, real.ny));
    io::write_atomic(out / "predicted.pgm", heatmap_pgm(pred));
    io::write_atomic(out / "truth.pgm", heatmap_pgm(real));
    const double bc = bhattacharyya(pred, real);
    io::write_atomic(out / "summary.json", io::dump_json({{"match_id", set.match_id},
                                                          {"agent_id", agent},
                                                          {"bhattacharyya", bc},
                                                          {"uniform_bhattacharyya",
                                                           bhattacharyya(uniform_heatmap(), real)}}));
    std::printf("agent %d heatmap bhattacharyya %.4f\n", agent, bc);
    return io::kExitOk;
}

int cmd_gradcheck(const Globals& g) {
    const harness::RunConfig c = make_config(g);
    double worst = 0.0;
    bool ok = true;
    for (const ModelKind k : {ModelKind::tlstm, ModelKind::gnn, ModelKind::agent_imputer}) {
        const nn::GradCheckReport r = gradcheck_model(k, c.model.seed);
        std::printf("%-14s checked %4zu  max relative error %.3e\n", std::string(model_name(k)).c_str(), r.checked,
                    r.max_rel_error);
        worst = std::max(worst, r.max_rel_error);
        ok = ok && r.passed();
    }
    std::printf("max relative error %.3e (tolerance 1e-04): %s\n", worst, ok ? "ok" : "FAILED");
    return ok ? io::kExitOk : io::kExitNumeric;
}

int cmd_bench(const Globals& g) {
    const harness::RunConfig c = make_config(g);
    const fs::path out = require_out(g, "bench");
    const auto start = std::chrono::steady_clock::now();
    const json report = harness::run_bench(c, out, log_stderr);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-14s %10s %12s\n", "model", "XY (m)", "PC MAE");
    for (const auto& name : report["ordering_by_xy"]) {
        const json& m = report["models"][name.get<std::string>()];
        std::printf("%-14s %10.3f %12.4f\n", name.get<std::string>().c_str(),
                    m["test_error"]["xy"]["mean"].get<double>(), m["pitch_control_mae"]["mean"].get<double>());
    }
    std::printf("report: %s (%.0f s)\n", (out / "report.json").string().c_str(), secs);
    return io::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impute player positions from football event data"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "root seed for data generation and training");
    app.add_option("--threads", g.threads, "worker threads (PITCH_IMPUTER_THREADS overrides)")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output path");
    app.add_option("--data", g.data, "dataset directory written by synth (default: synthesize in memory)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");

    std::size_t feat_fold = 0;
    auto* featurize = app.add_subcommand("featurize", "write embedded feature tensors for one fold");
    featurize->add_option("--fold", feat_fold, "fold whose training split fits the scalers");

    std::string train_model;
    std::optional<std::size_t> train_fold_arg;
    auto* train_cmd = app.add_subcommand("train", "train one model on one fold and predict its test matches");
    train_cmd->add_option("--model", train_model, "baseline1|baseline2|baseline3|tlstm|gnn|agent_imputer");
    train_cmd->add_option("--fold", train_fold_arg, "fold index");

    std::string eval_run;
    std::vector<std::string> eval_models;
    auto* evaluate = app.add_subcommand("evaluate", "error tables and curves for trained folds");
    evaluate->add_option("--run", eval_run, "run directory (default: --out)");
    evaluate->add_option("--models", eval_models, "models to evaluate (default: all present)")->delimiter(',');

    std::string impute_dir, impute_model;
    int impute_match = 0;
    auto* impute = app.add_subcommand("impute", "write a prediction set for one match");
    impute->add_option("--fold-dir", impute_dir, "trained fold directory (model.json, params.bin)");
    impute->add_option("--model", impute_model, "baseline kind, instead of a trained fold");
    impute->add_option("--match", impute_match, "match id")->required();

    auto* apps = app.add_subcommand("apps", "downstream applications");
    apps->require_subcommand(1);
    std::string stem;
    double merge_threshold = 1.0;
    auto* distance = apps->add_subcommand("distance", "distance covered per player");
    distance->add_option("--predictions", stem, "prediction stem written by impute")->required();
    distance->add_option("--merge-threshold", merge_threshold, "seconds");
    std::size_t pc_event = 0, pc_stride = 1;
    auto* pitchcontrol = apps->add_subcommand("pitchcontrol", "pitch-control grids and MAE");
    pitchcontrol->add_option("--predictions", stem, "prediction stem written by impute")->required();
    pitchcontrol->add_option("--event", pc_event, "event index for the exported grids");
    pitchcontrol->add_option("--stride", pc_stride, "score every n-th event")->check(CLI::PositiveNumber);
    int hm_agent = 0;
    auto* heat = apps->add_subcommand("heatmap", "positional heatmap of one agent");
    heat->add_option("--predictions", stem, "prediction stem written by impute")->required();
    heat->add_option("--agent", hm_agent, "agent id")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every neural model");
    auto* bench = app.add_subcommand("bench", "synth -> train -> evaluate -> apps -> report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? io::kExitOk : io::kExitUsage;
    }

    try {
        if (*synth) return cmd_synth(g);
        if (*featurize) return cmd_featurize(g, feat_fold);
        if (*train_cmd) return cmd_train(g, train_model, train_fold_arg);
        if (*evaluate) return cmd_evaluate(g, eval_run, eval_models);
        if (*impute) return cmd_impute(g, impute_dir, impute_model, impute_match);
        if (*distance) return cmd_apps_distance(g, stem, merge_threshold);
        if (*pitchcontrol) return cmd_apps_pitchcontrol(g, stem, pc_event, pc_stride);
        if (*heat) return cmd_apps_heatmap(g, stem, hm_agent);
        if (*gradcheck) return cmd_gradcheck(g);
        if (*bench) return cmd_bench(g);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return io::kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return io::kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return io::kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return io::kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return io::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return io::kExitData;
    }
    return io::kExitUsage;
}
