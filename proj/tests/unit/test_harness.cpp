#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "fixtures.hpp"
#include "imputer/harness/bench.hpp"
#include "imputer/harness/io.hpp"

using namespace imputer;
namespace fs = std::filesystem;
using nlohmann::json;

TEST_CASE("json numbers keep 17 significant digits") {
    const double v = 0.1 + 0.2;
    const std::string text = io::dump_json(json{{"v", v}, {"i", 3}, {"w", 2.0}}, -1);
    CHECK(text.find("0.30000000000000004") != std::string::npos);
    CHECK(text.find("\"w\":2.0") != std::string::npos);
    CHECK(text.find("\"i\":3") != std::string::npos);
    CHECK(json::parse(text).at("v").get<double>() == v);
    const std::string nan = io::dump_json(json{{"x", std::numeric_limits<double>::quiet_NaN()}}, -1);
    CHECK(nan.find("null") != std::string::npos);
}

TEST_CASE("match and dataset round trip") {
    const fs::path dir = fixture::temp_dir("dataset");
    const Dataset& ds = fixture::short_dataset();
    io::write_dataset(dir, ds);
    CHECK(fs::exists(dir / "folds.json"));
    CHECK(fs::exists(dir / io::match_dir_name(0) / "events.jsonl"));
    const Dataset back = io::read_dataset(dir);
    REQUIRE(back.matches.size() == ds.matches.size());
    for (std::size_t i = 0; i < ds.matches.size(); ++i) {
        const MatchData& a = ds.matches[i];
        const MatchData& b = back.matches[i];
        CHECK(a.match_id == b.match_id);
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t t = 0; t < a.events.size(); ++t) {
            CHECK(a.events[t].t == b.events[t].t);
            CHECK(a.events[t].x == b.events[t].x);
            CHECK(a.events[t].type == b.events[t].type);
            CHECK(a.events[t].agent_id == b.events[t].agent_id);
        }
        REQUIRE(a.tracking.size() == b.tracking.size());
        for (std::size_t f = 0; f < a.tracking.size(); f += 97) CHECK(a.tracking[f].positions == b.tracking[f].positions);
        CHECK(a.attack_direction == b.attack_direction);
        CHECK(a.goals.size() == b.goals.size());
        for (int n = 0; n < kNumAgents; ++n) CHECK(a.roster[n].role == b.roster[n].role);
    }
    CHECK(back.folds[0].test == ds.folds[0].test);
    fs::remove(dir / "folds.json");
    CHECK_THROWS_AS(io::read_dataset(dir), DataError);
    fs::remove_all(dir);
}

TEST_CASE("prediction files round trip") {
    const fs::path dir = fixture::temp_dir("pred");
    const MatchData& m = fixture::short_match();
    PredictionSet p = PredictionSet::skeleton(m);
    Rng rng(1);
    for (auto& row : p.phi_hat) {
        for (Point& q : row) q = {rng.uniform(0, 105), rng.uniform(0, 68)};
    }
    io::write_predictions(dir / "match_000", p);
    CHECK(fs::file_size(dir / "match_000.f64") == p.size() * kNumAgents * 2 * sizeof(double));
    const PredictionSet q = io::read_predictions(dir / "match_000");
    CHECK(q.match_id == p.match_id);
    CHECK(q.t == p.t);
    CHECK(q.phi_hat == p.phi_hat);
    CHECK(q.observed_agent == p.observed_agent);
    CHECK(q.observed_location == p.observed_location);
    fs::remove_all(dir);
}

TEST_CASE("history csv") {
    const std::vector<EpochRecord> h = {{1, 6.5, 7.25}, {2, 5.0, std::numeric_limits<double>::quiet_NaN()}};
    const std::string csv = io::history_csv(h);
    CHECK(csv.rfind("epoch,train_loss_m,test_loss_m\n", 0) == 0);
    CHECK(csv.find("1,6.5") != std::string::npos);
}

TEST_CASE("configuration files") {
    harness::RunConfig c;
    c.set_seed(11);
    CHECK(c.synth.seed == 11);
    CHECK(c.model.seed == 11);
    const json j = harness::run_config_to_json(c);
    harness::RunConfig d;
    harness::apply_run_config(j, d);
    CHECK(harness::run_config_to_json(d) == j);

    CHECK_THROWS_AS(harness::apply_run_config(json{{"unknown", 1}}, d), DataError);
    CHECK_THROWS_AS(harness::apply_run_config(json{{"synth", {{"n_matchez", 3}}}}, d), DataError);
    CHECK_THROWS_AS(harness::apply_run_config(json{{"model", {{"lr", "fast"}}}}, d), DataError);
    harness::apply_run_config(json{{"model", {{"epochs", 3}}}, {"model_kind", "gnn"}}, d);
    CHECK(d.model.epochs == 3);
    CHECK(d.kind == ModelKind::gnn);

    SynthConfig s;
    io::apply_synth_json(io::synth_to_json(s), s);
    CHECK(io::synth_to_json(s) == io::synth_to_json(SynthConfig{}));
}

TEST_CASE("thread count from the environment") {
    unsetenv("PITCH_IMPUTER_THREADS");
    CHECK(harness::resolve_threads(3) == 3);
    CHECK(harness::resolve_threads(0) == 1);
    setenv("PITCH_IMPUTER_THREADS", "2", 1);
    CHECK(harness::resolve_threads(5) == 2);
    setenv("PITCH_IMPUTER_THREADS", "two", 1);
    CHECK_THROWS(harness::resolve_threads(5));
    unsetenv("PITCH_IMPUTER_THREADS");
}

TEST_CASE("stage manifests") {
    const fs::path run = fixture::temp_dir("manifest");
    const std::string fp = harness::fingerprint(json{{"a", 1}});
    CHECK(fp != harness::fingerprint(json{{"a", 2}}));
    CHECK_FALSE(harness::stage_done(run, "synth", fp));
    harness::mark_stage(run, "synth", fp);
    CHECK(harness::stage_done(run, "synth", fp));
    CHECK_FALSE(harness::stage_done(run, "synth", harness::fingerprint(json{{"a", 2}})));
    fs::remove_all(run);
}

TEST_CASE("synthetic dataset directories are reproducible") {
    const fs::path a = fixture::temp_dir("synth_a");
    const fs::path b = fixture::temp_dir("synth_b");
    const SynthConfig c = fixture::short_config(1, 1200.0);
    io::write_dataset(a, generate_dataset(c));
    io::write_dataset(b, generate_dataset(c));
    for (const char* f : {"events.jsonl", "tracking.jsonl", "roster.json"}) {
        CHECK(io::read_text(a / "match_000" / f) == io::read_text(b / "match_000" / f));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("small bench end to end and restart") {
    const fs::path out = fixture::temp_dir("bench");
    harness::RunConfig c;
    c.synth = fixture::short_config(2, 1200.0);
    c.model.h1 = 8;
    c.model.h2 = 6;
    c.model.h3 = 6;
    c.model.h4 = 6;
    c.bench.epochs = 1;
    c.bench.pitch_control_stride = 50;
    c.bench.models = {ModelKind::baseline1, ModelKind::baseline3, ModelKind::agent_imputer};
    std::vector<std::string> lines;
    const json report = harness::run_bench(c, out, [&](const std::string& s) { lines.push_back(s); });
    CHECK(report.at("schema") == "pitch-imputer-report");
    CHECK(report.at("version") == harness::kReportVersion);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(harness::fold_dir(out, ModelKind::agent_imputer, 0) / "history.csv"));
    CHECK(fs::exists(harness::fold_dir(out, ModelKind::agent_imputer, 0) / "params.bin"));
    CHECK(fs::exists(out / "metrics" / "agent_imputer" / "metrics.json"));
    CHECK(report.at("models").contains("baseline3"));
    CHECK(report.at("ordering_by_xy").size() == 3);

    lines.clear();
    const json again = harness::run_bench(c, out, [&](const std::string& s) { lines.push_back(s); });
    CHECK(io::dump_json(again.at("models")) == io::dump_json(report.at("models")));
    bool reused = false;
    for (const auto& l : lines) reused = reused || l.find("reusing") != std::string::npos;
    CHECK(reused);
    fs::remove_all(out);
}
