#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "earsim/engine.hpp"

namespace earsim {

struct TimedCommand {
    double t = 0.0;
    std::string cmd;
    nlohmann::json args = nlohmann::json::object();
};

struct ClientScript {
    std::string role = "scripted"; // scripted | name_listener | vigilance_operator | head_turner
    nlohmann::json role_args = nlohmann::json::object();
    std::vector<TimedCommand> commands;
};

struct RangeCheck {
    std::string path; // JSON pointer into the event, e.g. /heard/azimuth
    double min = -1e18;
    double max = 1e18;
};

struct Expectation {
    std::string kind;
    double t_min = 0.0;
    double t_max = 1e18;
    nlohmann::json where = nlohmann::json::object(); // subset match on the event
    std::vector<RangeCheck> ranges;
    int min_count = 1;
    int max_count = -1; // -1 = unbounded
};

struct ScenarioScript {
    std::string name;
    std::string scene_path; // resolved relative to the script file
    nlohmann::json config_overrides = nlohmann::json::object();
    uint64_t seed = 1;
    std::vector<ClientScript> clients;
    std::vector<Expectation> expectations;

    static ScenarioScript load_file(const std::string& path);
};

struct RunResult {
    int exit_code = 0; // 0 ok, 1 expectation failure, 2 input error
    std::vector<std::string> unmet;
    std::vector<EventMessage> events;
    std::string log_text; // command/ack/event lines, byte-reproducible
    AttentionMetrics metrics;
    SimConfig config;
    std::string scene_path;
};

struct RunOptions {
    std::optional<uint64_t> seed_override;
    bool realtime = false;
    std::string frame_dump_path; // empty = no dump
};

// Builds the engine (builtin ontology + config extras), steps the virtual
// clock over the scene, injects scripted commands at their times, lets mock
// agents react to events, checks expectations. Fully deterministic for a
// given (script, config, seed).
RunResult run_scenario(const ScenarioScript& script, const SimConfig& base_config,
                       const RunOptions& options = {});

// Convenience: scenario path -> run with its embedded config/seed.
RunResult run_scenario_file(const std::string& scenario_path, const RunOptions& options = {});

// Merges scenario overrides over a base config document (one level deep).
SimConfig apply_config_overrides(const SimConfig& base, const nlohmann::json& overrides);

// Writes <stem>.events.jsonl and <stem>.meta.json under log_dir.
void write_run_artifacts(const std::string& log_dir, const std::string& name,
                         const ScenarioScript& script, const RunResult& result);

// --- mock cognition clients -------------------------------------------------

class MockAgent {
public:
    virtual ~MockAgent() = default;
    struct Io {
        std::function<void(const std::string& cmd, nlohmann::json args)> send;
    };
    virtual void on_start(Io& io) = 0;
    virtual void on_event(const EventMessage& event, Io& io) = 0;
};

// role in {name_listener, vigilance_operator, head_turner}; args per role.
std::unique_ptr<MockAgent> make_mock_agent(const std::string& role, const nlohmann::json& args);

// --- scorecard ---------------------------------------------------------------

struct ScorecardItem {
    std::string verdict = "not_applicable"; // pass | fail | not_applicable
    std::string evidence;
};

struct Scorecard {
    std::map<std::string, ScorecardItem> items; // keyed 1a..5b
    std::string to_markdown() const;
    nlohmann::json to_json() const;
    bool all_in_scope_pass() const;
};

const std::vector<std::string>& scorecard_item_ids();

// Evaluates every run found in log_dir (pairs of .events.jsonl/.meta.json).
Scorecard evaluate_scorecard(const std::string& log_dir);

} // namespace earsim
