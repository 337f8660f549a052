#include "earsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "earsim/error.hpp"

namespace earsim {

namespace fs = std::filesystem;

ScenarioScript ScenarioScript::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EarError(ErrorCode::io_error, "cannot open scenario: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw EarError(ErrorCode::parse_error, "scenario parse error: " + std::string(e.what()));
    }
    ScenarioScript s;
    try {
        s.name = j.value("name", fs::path(path).stem().string());
        const fs::path base = fs::path(path).parent_path();
        s.scene_path = (base / j.at("scene").get<std::string>()).string();
        if (j.contains("config")) s.config_overrides = j.at("config");
        s.seed = j.value("seed", 1ull);
        if (j.contains("clients")) {
            for (const auto& cj : j.at("clients")) {
                ClientScript c;
                c.role = cj.value("role", "scripted");
                if (cj.contains("args")) c.role_args = cj.at("args");
                if (cj.contains("commands")) {
                    for (const auto& tj : cj.at("commands")) {
                        TimedCommand tc;
                        tc.t = tj.at("t").get<double>();
                        tc.cmd = tj.at("cmd").get<std::string>();
                        if (tj.contains("args")) tc.args = tj.at("args");
                        c.commands.push_back(std::move(tc));
                    }
                }
                s.clients.push_back(std::move(c));
            }
        }
        if (j.contains("expectations")) {
            for (const auto& ej : j.at("expectations")) {
                Expectation e;
                e.kind = ej.at("kind").get<std::string>();
                if (ej.contains("within")) {
                    e.t_min = ej.at("within").at(0).get<double>();
                    e.t_max = ej.at("within").at(1).get<double>();
                }
                if (ej.contains("where")) e.where = ej.at("where");
                if (ej.contains("ranges")) {
                    for (const auto& rj : ej.at("ranges")) {
                        RangeCheck r;
                        r.path = rj.at("path").get<std::string>();
                        r.min = rj.value("min", -1e18);
                        r.max = rj.value("max", 1e18);
                        e.ranges.push_back(std::move(r));
                    }
                }
                e.min_count = ej.value("min_count", 1);
                e.max_count = ej.value("max_count", -1);
                s.expectations.push_back(std::move(e));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw EarError(ErrorCode::parse_error,
                       "scenario schema error in " + path + ": " + e.what());
    }
    return s;
}

SimConfig apply_config_overrides(const SimConfig& base, const nlohmann::json& overrides) {
    nlohmann::json merged = base.to_json();
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (it->is_object() && merged.contains(it.key()) && merged[it.key()].is_object()) {
            for (auto inner = it->begin(); inner != it->end(); ++inner)
                merged[it.key()][inner.key()] = inner.value();
        } else {
            merged[it.key()] = it.value();
        }
    }
    return SimConfig::from_json(merged);
}

namespace {

// subset match: every key of `pattern` must appear in `value` with an equal
// (or recursively matching) payload
bool json_subset(const nlohmann::json& pattern, const nlohmann::json& value) {
    if (pattern.is_object()) {
        if (!value.is_object()) return false;
        for (auto it = pattern.begin(); it != pattern.end(); ++it) {
            if (!value.contains(it.key())) return false;
            if (!json_subset(it.value(), value.at(it.key()))) return false;
        }
        return true;
    }
    return pattern == value;
}

struct ScriptedFeed {
    int client = 0;
    double t = 0.0;
    int order = 0;
    CommandMessage cmd;
};

} // namespace

RunResult run_scenario(const ScenarioScript& script, const SimConfig& base_config,
                       const RunOptions& options) {
    RunResult result;
    result.scene_path = script.scene_path;
    SimConfig config;
    AuditoryScene scene;
    try {
        config = apply_config_overrides(base_config, script.config_overrides);
        scene = load_scene_file(script.scene_path);
    } catch (const EarError& e) {
        result.exit_code = 2;
        result.unmet.push_back(e.what());
        return result;
    }
    result.config = config;

    OntologyRegistry registry = OntologyRegistry::builtin(config.ear.channels);
    if (!config.ontology_path.empty()) {
        fs::path p = config.ontology_path;
        if (p.is_relative()) p = fs::path(script.scene_path).parent_path() / p;
        try {
            registry.merge_file(p.string());
        } catch (const EarError& e) {
            result.exit_code = 2;
            result.unmet.push_back(e.what());
            return result;
        }
    }

    const uint64_t seed = options.seed_override.value_or(script.seed);
    std::unique_ptr<Engine> engine;
    try {
        engine = std::make_unique<Engine>(std::move(scene), std::move(registry), config, seed);
    } catch (const EarError& e) {
        result.exit_code = 2;
        result.unmet.push_back(e.what());
        return result;
    }

    std::string log;
    auto log_line = [&log](const nlohmann::json& j) { log += j.dump() + "\n"; };

    // scripted command feed, time-ordered and stable
    std::vector<ScriptedFeed> feed;
    std::vector<std::unique_ptr<MockAgent>> agents(script.clients.size());
    for (size_t ci = 0; ci < script.clients.size(); ++ci) {
        const ClientScript& c = script.clients[ci];
        int order = 0;
        for (const TimedCommand& tc : c.commands) {
            ScriptedFeed f;
            f.client = static_cast<int>(ci);
            f.t = tc.t;
            f.order = order++;
            auto cmd = command_from_string(tc.cmd);
            if (!cmd) {
                result.exit_code = 2;
                result.unmet.push_back("unknown command in script: " + tc.cmd);
                return result;
            }
            f.cmd.cmd = *cmd;
            f.cmd.args = tc.args;
            feed.push_back(std::move(f));
        }
        if (c.role != "scripted") agents[ci] = make_mock_agent(c.role, c.role_args);
    }
    std::stable_sort(feed.begin(), feed.end(), [](const ScriptedFeed& a, const ScriptedFeed& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.client != b.client) return a.client < b.client;
        return a.order < b.order;
    });

    std::map<int, int64_t> next_seq;
    std::vector<ScriptedFeed> agent_queue;
    auto issue = [&](int client, CommandMessage cmd, double at) {
        cmd.seq = ++next_seq[client];
        nlohmann::json cj = to_json(cmd);
        cj["t"] = at;
        cj["client"] = client;
        log_line(cj);
        AckMessage ack = engine->handle_command(client, cmd, at);
        nlohmann::json aj = to_json(ack);
        aj["t"] = at;
        aj["client"] = client;
        log_line(aj);
    };

    std::vector<MockAgent::Io> agent_io(script.clients.size());
    for (size_t ci = 0; ci < script.clients.size(); ++ci) {
        const int client = static_cast<int>(ci);
        agent_io[ci].send = [&, client](const std::string& cmd, nlohmann::json args) {
            auto parsed = command_from_string(cmd);
            if (!parsed) return;
            ScriptedFeed f;
            f.client = client;
            f.cmd.cmd = *parsed;
            f.cmd.args = std::move(args);
            agent_queue.push_back(std::move(f));
        };
    }

    engine->set_event_sink([&](const EventMessage& e) {
        result.events.push_back(e);
        log_line(to_json(e));
        for (size_t ci = 0; ci < agents.size(); ++ci)
            if (agents[ci]) agents[ci]->on_event(e, agent_io[ci]);
    });

    std::ofstream frame_dump;
    if (!options.frame_dump_path.empty()) {
        const fs::path parent = fs::path(options.frame_dump_path).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        frame_dump.open(options.frame_dump_path);
        engine->set_frame_dump([&frame_dump](const FrameObservation& obs) {
            auto row = [&](const char* ear, const std::vector<double>& v) {
                frame_dump << obs.frame.t << ',' << ear;
                for (double x : v) frame_dump << ',' << x;
                frame_dump << '\n';
            };
            row("L", obs.frame.left_db);
            row("R", obs.frame.right_db);
        });
    }

    for (size_t ci = 0; ci < agents.size(); ++ci)
        if (agents[ci]) agents[ci]->on_start(agent_io[ci]);

    size_t feed_pos = 0;
    const double hop = engine->frame_hop();
    while (!engine->finished()) {
        const double t_next = engine->now() + hop;
        // agent reactions from the previous step run first, at the step edge
        std::vector<ScriptedFeed> reactions;
        reactions.swap(agent_queue);
        for (ScriptedFeed& f : reactions) issue(f.client, f.cmd, std::max(engine->now(), 0.0));
        while (feed_pos < feed.size() && feed[feed_pos].t <= t_next + 1e-12) {
            issue(feed[feed_pos].client, feed[feed_pos].cmd, feed[feed_pos].t);
            ++feed_pos;
        }
        engine->step();
        if (options.realtime)
            std::this_thread::sleep_for(std::chrono::duration<double>(hop));
    }
    engine->drain_events();

    result.metrics = engine->metrics();
    result.log_text = std::move(log);

    for (const Expectation& exp : script.expectations) {
        int count = 0;
        for (const EventMessage& e : result.events) {
            if (std::string(to_string(e.kind)) != exp.kind) continue;
            if (e.t < exp.t_min || e.t > exp.t_max) continue;
            const nlohmann::json ej = to_json(e);
            if (!json_subset(exp.where, ej)) continue;
            bool in_range = true;
            for (const RangeCheck& r : exp.ranges) {
                const nlohmann::json::json_pointer ptr(r.path);
                if (!ej.contains(ptr) || !ej.at(ptr).is_number()) {
                    in_range = false;
                    break;
                }
                const double v = ej.at(ptr).get<double>();
                if (v < r.min || v > r.max) in_range = false;
            }
            if (!in_range) continue;
            ++count;
        }
        if (count < exp.min_count || (exp.max_count >= 0 && count > exp.max_count)) {
            result.unmet.push_back("expectation unmet: " + exp.kind + " in [" +
                                   std::to_string(exp.t_min) + ", " + std::to_string(exp.t_max) +
                                   "] where " + exp.where.dump() + " (count " +
                                   std::to_string(count) + ")");
        }
    }
    if (!result.unmet.empty()) result.exit_code = 1;
    return result;
}

RunResult run_scenario_file(const std::string& scenario_path, const RunOptions& options) {
    SimConfig base;
    base.ear.finalize();
    return run_scenario(ScenarioScript::load_file(scenario_path), base, options);
}

void write_run_artifacts(const std::string& log_dir, const std::string& name,
                         const ScenarioScript& script, const RunResult& result) {
    fs::create_directories(log_dir);
    {
        std::ofstream out(fs::path(log_dir) / (name + ".events.jsonl"));
        out << result.log_text;
    }
    nlohmann::json meta;
    meta["scenario"] = script.name;
    meta["scene_path"] = fs::absolute(result.scene_path).string();
    meta["seed"] = script.seed;
    meta["config"] = result.config.to_json();
    meta["exit_code"] = result.exit_code;
    meta["unmet"] = result.unmet;
    meta["metrics"] = {
        {"alarms_delivered", result.metrics.alarms_delivered},
        {"alarms_deferred", result.metrics.alarms_deferred},
        {"alarms_dropped_station", result.metrics.alarms_dropped_station},
        {"alarms_dropped_quiet", result.metrics.alarms_dropped_quiet},
        {"alarms_consolidated", result.metrics.alarms_consolidated},
        {"alarm_watermark_exceeded", result.metrics.alarm_watermark_exceeded},
        {"found_events", result.metrics.found_events},
        {"interrupt_events", result.metrics.interrupt_events},
        {"sound_events", result.metrics.sound_events},
    };
    std::ofstream out(fs::path(log_dir) / (name + ".meta.json"));
    out << meta.dump(2) << "\n";
}

} // namespace earsim
