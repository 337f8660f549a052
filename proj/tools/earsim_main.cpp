// earsim: run scripted auditory scenes against the ear engine, score the
// capability checklist, or expose the wire protocol to external clients.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "earsim/error.hpp"
#include "earsim/harness.hpp"
#include "earsim/protocol.hpp"
#include "earsim/server.hpp"

namespace fs = std::filesystem;
using namespace earsim;

namespace {

SimConfig load_base_config(const std::string& path) {
    if (path.empty()) {
        SimConfig c;
        c.ear.finalize();
        return c;
    }
    return SimConfig::load_file(path);
}

int cmd_run(const std::string& scenario_path, const std::string& config_path, int64_t seed,
            bool realtime, const std::string& log_path, const std::string& frame_dump) {
    ScenarioScript script = ScenarioScript::load_file(scenario_path);
    SimConfig base = load_base_config(config_path);
    RunOptions opts;
    if (seed >= 0) opts.seed_override = static_cast<uint64_t>(seed);
    opts.realtime = realtime;
    opts.frame_dump_path = frame_dump;
    RunResult result = run_scenario(script, base, opts);

    if (result.exit_code == 2) {
        for (const std::string& m : result.unmet) std::cerr << "error: " << m << "\n";
        return 2;
    }
    if (!log_path.empty()) {
        if (opts.seed_override) script.seed = *opts.seed_override;
        const fs::path p(log_path);
        fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
        std::string stem = p.filename().string();
        const std::string suffix = ".events.jsonl";
        if (stem.size() > suffix.size() &&
            stem.substr(stem.size() - suffix.size()) == suffix)
            stem = stem.substr(0, stem.size() - suffix.size());
        else
            stem = fs::path(stem).stem().string();
        write_run_artifacts(dir.string(), stem, script, result);
    } else {
        std::cout << result.log_text;
    }
    for (const std::string& m : result.unmet) std::cerr << "unmet: " << m << "\n";
    std::cerr << "events: " << result.events.size()
              << ", alarms delivered: " << result.metrics.alarms_delivered
              << ", deferred: " << result.metrics.alarms_deferred << "\n";
    return result.exit_code;
}

int cmd_scorecard(const std::string& log_dir, const std::string& out_path) {
    Scorecard card = evaluate_scorecard(log_dir);
    const std::string md = card.to_markdown();
    if (out_path.empty()) {
        std::cout << md;
    } else {
        std::ofstream out(out_path);
        out << md;
        std::cout << "wrote " << out_path << "\n";
    }
    int pass = 0, failed = 0, na = 0;
    for (const auto& [id, item] : card.items) {
        if (item.verdict == "pass") ++pass;
        if (item.verdict == "fail") ++failed;
        if (item.verdict == "not_applicable") ++na;
    }
    std::cout << pass << " pass, " << failed << " fail, " << na << " not applicable\n";
    return failed == 0 ? 0 : 1;
}

int cmd_serve(const std::string& scene_path, const std::string& listen,
              const std::string& config_path, int64_t seed, double speed) {
    SimConfig config = load_base_config(config_path);
    AuditoryScene scene = load_scene_file(scene_path);
    OntologyRegistry registry = OntologyRegistry::builtin(config.ear.channels);
    if (!config.ontology_path.empty()) registry.merge_file(config.ontology_path);

    Engine engine(std::move(scene), std::move(registry), config,
                  seed >= 0 ? static_cast<uint64_t>(seed) : 1);

    std::string host = "127.0.0.1";
    uint16_t port = 0;
    const auto colon = listen.rfind(':');
    if (colon != std::string::npos) {
        host = listen.substr(0, colon);
        port = static_cast<uint16_t>(std::stoi(listen.substr(colon + 1)));
    } else if (!listen.empty()) {
        port = static_cast<uint16_t>(std::stoi(listen));
    }

    ProtocolServer server(engine, host, port);
    engine.set_event_sink([&server](const EventMessage& e) { server.deliver_event(e); });
    server.start();
    std::cout << "listening on " << server.endpoint() << std::endl;

    const double hop = engine.frame_hop();
    auto next = std::chrono::steady_clock::now();
    while (!engine.finished()) {
        server.pump(engine.now());
        engine.step();
        next += std::chrono::microseconds(static_cast<int64_t>(hop * 1e6 / speed));
        std::this_thread::sleep_until(next);
    }
    engine.drain_events();
    server.pump(engine.now());
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    std::cout << "scene finished, " << engine.event_log().size() << " events\n";
    return 0;
}

int cmd_validate(const std::string& scene_path, const std::string& config_path) {
    SimConfig config = load_base_config(config_path);
    AuditoryScene scene = load_scene_file(scene_path);
    OntologyRegistry registry = OntologyRegistry::builtin(config.ear.channels);
    if (!config.ontology_path.empty()) registry.merge_file(config.ontology_path);
    std::vector<std::string> violations = validate_scene(scene, &registry);
    for (const std::string& v : violations) std::cout << "violation: " << v << "\n";
    if (violations.empty()) {
        std::cout << "ok: " << scene.sources.size() << " sources, " << scene.duration_s << " s\n";
        return 0;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"earsim: auditory scene simulator with a cognition-facing ear protocol"};
    app.require_subcommand(1);

    std::string scenario, config_path, log_path, frame_dump, log_dir, out_path, scene_path,
        listen = "127.0.0.1:5533";
    int64_t seed = -1;
    bool realtime = false;
    double speed = 1.0;

    CLI::App* run = app.add_subcommand("run", "run one scenario script");
    run->add_option("scenario", scenario, "scenario JSON file")->required();
    run->add_option("--config", config_path, "base engine config JSON");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_flag("--realtime", realtime, "pace the virtual clock at wall speed");
    run->add_option("--log", log_path, "write <stem>.events.jsonl and <stem>.meta.json");
    run->add_option("--dump-frames", frame_dump, "write cochleagram rows t,ear,ch0..chN-1");

    CLI::App* score = app.add_subcommand("scorecard", "score a directory of run logs");
    score->add_option("logdir", log_dir, "directory holding *.events.jsonl/*.meta.json")
        ->required();
    score->add_option("--out", out_path, "write the markdown report here");

    CLI::App* serve = app.add_subcommand("serve", "serve the ear protocol over TCP");
    serve->add_option("--scene", scene_path, "scene JSON file")->required();
    serve->add_option("--listen", listen, "host:port (port 0 = ephemeral)");
    serve->add_option("--config", config_path, "engine config JSON");
    serve->add_option("--seed", seed, "engine seed");
    serve->add_option("--speed", speed, "clock speed multiplier (1 = real time)");

    CLI::App* validate = app.add_subcommand("validate", "check a scene file");
    validate->add_option("scene", scene_path, "scene JSON file")->required();
    validate->add_option("--config", config_path, "engine config JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario, config_path, seed, realtime, log_path, frame_dump);
        if (score->parsed()) return cmd_scorecard(log_dir, out_path);
        if (serve->parsed()) return cmd_serve(scene_path, listen, config_path, seed, speed);
        if (validate->parsed()) return cmd_validate(scene_path, config_path);
    } catch (const EarError& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
