#include "imputer/harness/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace imputer::io {

namespace {

void dump_rec(const json& v, int indent, int depth, std::string& out) {
    const auto pad = [&](int d) {
        if (indent >= 0) {
            out.push_back('\n');
            out.append(static_cast<std::size_t>(indent * d), ' ');
        }
    };
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out.push_back('{');
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                pad(depth + 1);
                out += json(it.key()).dump();
                out += indent >= 0 ? ": " : ":";
                dump_rec(it.value(), indent, depth + 1, out);
            }
            pad(depth);
            out.push_back('}');
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out.push_back('[');
            bool first = true;
            for (const auto& e : v) {
                if (!first) out.push_back(',');
                first = false;
                pad(depth + 1);
                dump_rec(e, indent, depth + 1, out);
            }
            pad(depth);
            out.push_back(']');
            return;
        }
        case json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            std::string s(buf);
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
            out += s;
            return;
        }
        default:
            out += v.dump();
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.contains(it.key())) throw DataError(where + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::string dump_json(const json& value, int indent) {
    std::string out;
    dump_rec(value, indent, 0, out);
    out.push_back('\n');
    return out;
}

void write_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    write_atomic(path, std::string(bytes.begin(), bytes.end()));
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    const std::string s = read_text(path);
    return {s.begin(), s.end()};
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// ---- match data ----------------------------------------------------------------

std::string match_dir_name(int match_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "match_%03d", match_id);
    return buf;
}

void write_match(const fs::path& dir, const MatchData& match) {
    std::string events;
    for (const Event& e : match.events) {
        json j = {{"t", e.t},
                  {"period", e.period},
                  {"event_type", std::string(event_type_name(e.type))},
                  {"agent_id", e.agent_id},
                  {"team_id", std::string(team_name(e.team))},
                  {"x", e.x},
                  {"y", e.y}};
        events += dump_json(j, -1);
    }
    write_atomic(dir / "events.jsonl", events);

    std::string tracking;
    for (const TrackingFrame& f : match.tracking) {
        json positions = json::array();
        for (int n = 0; n < kNumAgents; ++n) {
            const Point p = f.positions[static_cast<std::size_t>(n)];
            positions.push_back({{"agent_id", n}, {"x", p.x}, {"y", p.y}});
        }
        json j = {{"t", f.t}, {"positions", positions}, {"ball", {{"x", f.ball.x}, {"y", f.ball.y}}}};
        tracking += dump_json(j, -1);
    }
    write_atomic(dir / "tracking.jsonl", tracking);

    json roster = json::array();
    for (const RosterEntry& r : match.roster) {
        roster.push_back({{"agent_id", r.agent_id},
                          {"team_id", std::string(team_name(r.team))},
                          {"role", std::string(role_name(r.role))},
                          {"minutes_played", r.minutes_played}});
    }
    json directions;
    for (const Team team : {Team::home, Team::away}) {
        directions[std::string(team_name(team))] = {std::string(direction_name(match.direction(team, 1))),
                                                    std::string(direction_name(match.direction(team, 2)))};
    }
    json goals = json::array();
    for (const Goal& g : match.goals) goals.push_back({{"t", g.t}, {"team_id", std::string(team_name(g.team))}});
    json meta = {{"match_id", match.match_id},
                 {"roster", roster},
                 {"attack_direction", directions},
                 {"goals", goals},
                 {"period_start", {match.period_start[0], match.period_start[1]}}};
    write_atomic(dir / "roster.json", dump_json(meta));
}

MatchData read_match(const fs::path& dir) {
    MatchData m;
    try {
        const json meta = read_json(dir / "roster.json");
        m.match_id = meta.at("match_id").get<int>();
        for (const auto& r : meta.at("roster")) {
            RosterEntry e;
            e.agent_id = r.at("agent_id").get<int>();
            e.team = parse_team(r.at("team_id").get<std::string>());
            e.role = parse_role(r.at("role").get<std::string>());
            e.minutes_played = r.value("minutes_played", 90.0);
            m.roster.push_back(e);
        }
        for (const Team team : {Team::home, Team::away}) {
            const auto& dirs = meta.at("attack_direction").at(std::string(team_name(team)));
            for (std::size_t p = 0; p < 2; ++p) {
                m.attack_direction[static_cast<std::size_t>(team)][p] = parse_direction(dirs.at(p).get<std::string>());
            }
        }
        for (const auto& g : meta.value("goals", json::array())) {
            m.goals.push_back({g.at("t").get<double>(), parse_team(g.at("team_id").get<std::string>())});
        }
        if (meta.contains("period_start")) {
            m.period_start = {meta.at("period_start").at(0).get<double>(), meta.at("period_start").at(1).get<double>()};
        }

        const auto event_lines = read_lines(dir / "events.jsonl");
        for (std::size_t i = 0; i < event_lines.size(); ++i) {
            const json j = json::parse(event_lines[i]);
            Event e;
            e.t = j.at("t").get<double>();
            e.period = j.at("period").get<int>();
            e.type = parse_event_type(j.at("event_type").get<std::string>());
            e.agent_id = j.at("agent_id").get<int>();
            e.team = parse_team(j.at("team_id").get<std::string>());
            e.x = j.at("x").get<double>();
            e.y = j.at("y").get<double>();
            m.events.push_back(e);
        }
        const auto frame_lines = read_lines(dir / "tracking.jsonl");
        for (const std::string& line : frame_lines) {
            const json j = json::parse(line);
            TrackingFrame f;
            f.t = j.at("t").get<double>();
            const auto& positions = j.at("positions");
            if (positions.size() != static_cast<std::size_t>(kNumAgents)) {
                throw DataError("tracking frame at t=" + std::to_string(f.t) + " does not have 22 positions");
            }
            for (const auto& p : positions) {
                const int id = p.at("agent_id").get<int>();
                if (id < 0 || id >= kNumAgents) throw DataError("tracking agent_id out of range");
                f.positions[static_cast<std::size_t>(id)] = {p.at("x").get<double>(), p.at("y").get<double>()};
            }
            f.ball = {j.at("ball").at("x").get<double>(), j.at("ball").at("y").get<double>()};
            m.tracking.push_back(f);
        }
    } catch (const json::exception& e) {
        throw DataError(dir.string() + ": malformed match data: " + e.what());
    }
    m.validate();
    return m;
}

json folds_to_json(const std::vector<Fold>& folds) {
    json arr = json::array();
    for (const Fold& f : folds) arr.push_back({{"train", f.train}, {"test", f.test}});
    return {{"folds", arr}};
}

std::vector<Fold> folds_from_json(const json& j) {
    std::vector<Fold> out;
    try {
        for (const auto& f : j.at("folds")) {
            out.push_back({f.at("train").get<std::vector<int>>(), f.at("test").get<std::vector<int>>()});
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed folds.json: ") + e.what());
    }
    return out;
}

void write_dataset(const fs::path& dir, const Dataset& dataset) {
    fs::create_directories(dir);
    for (const MatchData& m : dataset.matches) write_match(dir / match_dir_name(m.match_id), m);
    write_atomic(dir / "folds.json", dump_json(folds_to_json(dataset.folds)));
}

Dataset read_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
    Dataset ds;
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && entry.path().filename().string().rfind("match_", 0) == 0) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) ds.matches.push_back(read_match(d));
    if (ds.matches.empty()) throw DataError("no match_* directories in " + dir.string());
    for (std::size_t i = 0; i < ds.matches.size(); ++i) {
        if (ds.matches[i].match_id != static_cast<int>(i)) {
            throw DataError("match ids must be 0..n-1 in directory order (found " +
                            std::to_string(ds.matches[i].match_id) + ")");
        }
    }
    ds.folds = folds_from_json(read_json(dir / "folds.json"));
    for (const Fold& f : ds.folds) {
        for (const auto* split : {&f.train, &f.test}) {
            for (const int m : *split) {
                if (m < 0 || m >= static_cast<int>(ds.matches.size())) throw DataError("folds.json references unknown match");
            }
        }
    }
    return ds;
}

// ---- predictions ---------------------------------------------------------------

void write_predictions(const fs::path& stem, const PredictionSet& set) {
    std::string payload;
    payload.reserve(set.size() * kNumAgents * 16);
    auto put = [&](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) payload.push_back(static_cast<char>(bits >> (8 * i)));
    };
    for (const AgentPositions& row : set.phi_hat) {
        for (const Point& p : row) {
            put(p.x);
            put(p.y);
        }
    }
    json locations = json::array();
    for (const Point& p : set.observed_location) locations.push_back({p.x, p.y});
    json meta = {{"match_id", set.match_id},
                 {"dtype", "f64le"},
                 {"shape", {set.size(), kNumAgents, 2}},
                 {"layout", "[t][agent][x,y], absolute pitch frame, metres"},
                 {"t", set.t},
                 {"period", set.period},
                 {"observed_agent", set.observed_agent},
                 {"observed_location", locations}};
    fs::path bin = stem;
    bin += ".f64";
    fs::path side = stem;
    side += ".json";
    write_atomic(bin, payload);
    write_atomic(side, dump_json(meta, -1));
}

PredictionSet read_predictions(const fs::path& stem) {
    fs::path bin = stem;
    bin += ".f64";
    fs::path side = stem;
    side += ".json";
    const json meta = read_json(side);
    PredictionSet set;
    try {
        set.match_id = meta.at("match_id").get<int>();
        set.t = meta.at("t").get<std::vector<double>>();
        set.period = meta.at("period").get<std::vector<int>>();
        set.observed_agent = meta.at("observed_agent").get<std::vector<int>>();
        for (const auto& p : meta.at("observed_location")) set.observed_location.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    } catch (const json::exception& e) {
        throw DataError(side.string() + ": " + e.what());
    }
    const std::string payload = read_text(bin);
    const std::size_t rows = set.t.size();
    if (payload.size() != rows * kNumAgents * 16 || set.period.size() != rows || set.observed_agent.size() != rows ||
        set.observed_location.size() != rows) {
        throw DataError(stem.string() + ": prediction payload does not match its sidecar");
    }
    auto get = [&](std::size_t i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[i * 8 + static_cast<std::size_t>(b)])) << (8 * b);
        return std::bit_cast<double>(bits);
    };
    set.phi_hat.resize(rows);
    for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t n = 0; n < static_cast<std::size_t>(kNumAgents); ++n) {
            const std::size_t i = (t * kNumAgents + n) * 2;
            set.phi_hat[t][n] = {get(i), get(i + 1)};
        }
    }
    return set;
}

void write_tensor_f32(const fs::path& stem, const std::vector<double>& values, const std::vector<std::size_t>& shape,
                      const json& extra) {
    std::size_t count = 1;
    for (const std::size_t s : shape) count *= s;
    if (count != values.size()) throw std::invalid_argument("write_tensor_f32: shape does not match value count");
    std::string payload;
    payload.reserve(values.size() * 4);
    for (const double v : values) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int i = 0; i < 4; ++i) payload.push_back(static_cast<char>(bits >> (8 * i)));
    }
    json meta = extra;
    meta["dtype"] = "f32le";
    meta["shape"] = shape;
    fs::path bin = stem;
    bin += ".f32";
    fs::path side = stem;
    side += ".json";
    write_atomic(bin, payload);
    write_atomic(side, dump_json(meta));
}

// ---- training artefacts --------------------------------------------------------

std::string history_csv(const std::vector<EpochRecord>& history) {
    std::string out = "epoch,train_loss_m,test_loss_m\n";
    char buf[96];
    for (const EpochRecord& r : history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.epoch, r.train_loss, r.test_loss);
        out += buf;
    }
    return out;
}

json scalers_to_json(const ScalerParams& s) {
    return {{"x_min", s.x_min},         {"x_max", s.x_max},          {"y_min", s.y_min},
            {"y_max", s.y_max},         {"time_median", s.time_median}, {"time_iqr", s.time_iqr}};
}

ScalerParams scalers_from_json(const json& j) {
    ScalerParams s;
    try {
        s.x_min = j.at("x_min").get<double>();
        s.x_max = j.at("x_max").get<double>();
        s.y_min = j.at("y_min").get<double>();
        s.y_max = j.at("y_max").get<double>();
        s.time_median = j.at("time_median").get<double>();
        s.time_iqr = j.at("time_iqr").get<double>();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed scalers: ") + e.what());
    }
    return s;
}

// ---- configuration -------------------------------------------------------------

json synth_to_json(const SynthConfig& c) {
    return {{"n_matches", c.n_matches},
            {"match_length", c.match_length},
            {"tracking_hz", c.tracking_hz},
            {"mean_event_gap", c.mean_event_gap},
            {"noise_scale", c.noise_scale},
            {"seed", c.seed},
            {"ball_attraction", c.ball_attraction},
            {"possession_push", c.possession_push},
            {"drift_time_constant", c.drift_time_constant},
            {"move_time_constant", c.move_time_constant},
            {"ball_smoothing", c.ball_smoothing},
            {"max_speed", c.max_speed},
            {"quick_gap_fraction", c.quick_gap_fraction},
            {"set_piece_probability", c.set_piece_probability},
            {"goal_probability", c.goal_probability},
            {"folds", c.folds},
            {"test_size", c.test_size}};
}

void apply_synth_json(const json& j, SynthConfig& c) {
    const json keys = synth_to_json(c);
    std::set<std::string> allowed;
    for (auto it = keys.begin(); it != keys.end(); ++it) allowed.insert(it.key());
    check_keys(j, allowed, "synth config");
    try {
        maybe(j, "n_matches", c.n_matches);
        maybe(j, "match_length", c.match_length);
        maybe(j, "tracking_hz", c.tracking_hz);
        maybe(j, "mean_event_gap", c.mean_event_gap);
        maybe(j, "noise_scale", c.noise_scale);
        maybe(j, "seed", c.seed);
        maybe(j, "ball_attraction", c.ball_attraction);
        maybe(j, "possession_push", c.possession_push);
        maybe(j, "drift_time_constant", c.drift_time_constant);
        maybe(j, "move_time_constant", c.move_time_constant);
        maybe(j, "ball_smoothing", c.ball_smoothing);
        maybe(j, "max_speed", c.max_speed);
        maybe(j, "quick_gap_fraction", c.quick_gap_fraction);
        maybe(j, "set_piece_probability", c.set_piece_probability);
        maybe(j, "goal_probability", c.goal_probability);
        maybe(j, "folds", c.folds);
        maybe(j, "test_size", c.test_size);
    } catch (const json::exception& e) {
        throw DataError(std::string("synth config: ") + e.what());
    }
}

json model_to_json(const ModelConfig& c) {
    return {{"window", c.window},     {"input", c.input},   {"batch", c.batch},
            {"micro_batch", c.micro_batch}, {"h1", c.h1},   {"h2", c.h2},
            {"h3", c.h3},             {"h4", c.h4},         {"epochs", c.epochs},
            {"lr", c.lr},             {"weight_decay", c.weight_decay}, {"seed", c.seed},
            {"eval_each_epoch", c.eval_each_epoch}};
}

void apply_model_json(const json& j, ModelConfig& c) {
    const json keys = model_to_json(c);
    std::set<std::string> allowed;
    for (auto it = keys.begin(); it != keys.end(); ++it) allowed.insert(it.key());
    check_keys(j, allowed, "model config");
    try {
        maybe(j, "window", c.window);
        maybe(j, "input", c.input);
        maybe(j, "batch", c.batch);
        maybe(j, "micro_batch", c.micro_batch);
        maybe(j, "h1", c.h1);
        maybe(j, "h2", c.h2);
        maybe(j, "h3", c.h3);
        maybe(j, "h4", c.h4);
        maybe(j, "epochs", c.epochs);
        maybe(j, "lr", c.lr);
        maybe(j, "weight_decay", c.weight_decay);
        maybe(j, "seed", c.seed);
        maybe(j, "eval_each_epoch", c.eval_each_epoch);
    } catch (const json::exception& e) {
        throw DataError(std::string("model config: ") + e.what());
    }
}

// ---- curves --------------------------------------------------------------------

std::string rolling_csv(const RollingSeries& s) {
    std::string out = "t,mean,sigma,matches\n";
    char buf[96];
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", s.t[i], s.mean[i], s.sigma[i], s.matches[i]);
        out += buf;
    }
    return out;
}

std::string offset_csv(const std::vector<OffsetPoint>& points) {
    std::string out = "seconds,mean_xy,count\n";
    char buf[96];
    for (const OffsetPoint& p : points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", p.label, p.mean_xy, p.count);
        out += buf;
    }
    return out;
}

std::string grid_csv(const std::vector<double>& cells, int nx, int ny) {
    std::string out;
    char buf[40];
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            std::snprintf(buf, sizeof buf, "%.17g", cells[static_cast<std::size_t>(iy * nx + ix)]);
            out += buf;
            out.push_back(ix + 1 < nx ? ',' : '\n');
        }
    }
    return out;
}

}  // namespace imputer::io
