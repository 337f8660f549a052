#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "earsim/error.hpp"
#include "earsim/harness.hpp"

namespace earsim {

namespace fs = std::filesystem;

namespace {

struct LoadedRun {
    std::string scenario;
    std::string file;
    nlohmann::json meta;
    AuditoryScene scene;
    bool scene_ok = false;
    std::vector<EventMessage> events;
    struct CmdRecord {
        double t;
        std::string cmd;
    };
    std::vector<CmdRecord> commands; // in log order
};

std::map<std::string, LoadedRun> load_runs(const std::string& dir) {
    std::map<std::string, LoadedRun> runs;
    if (!fs::is_directory(dir))
        throw EarError(ErrorCode::io_error, "not a log directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".meta.json";
        if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix)
            continue;
        const std::string stem = name.substr(0, name.size() - suffix.size());
        LoadedRun run;
        {
            std::ifstream in(entry.path());
            nlohmann::json meta;
            try {
                in >> meta;
            } catch (const nlohmann::json::exception&) {
                continue;
            }
            run.meta = std::move(meta);
        }
        run.scenario = run.meta.value("scenario", stem);
        run.file = stem + ".events.jsonl";
        const fs::path events_path = fs::path(dir) / run.file;
        std::ifstream in(events_path);
        if (!in) continue;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;
            if (j.contains("kind")) {
                try {
                    run.events.push_back(event_from_json(j));
                } catch (...) {
                }
            } else if (j.contains("cmd")) {
                run.commands.push_back({j.value("t", 0.0), j.value("cmd", "")});
            }
        }
        if (run.meta.contains("scene_path")) {
            try {
                run.scene = load_scene_file(run.meta.at("scene_path").get<std::string>());
                run.scene_ok = true;
            } catch (...) {
            }
        }
        runs[run.scenario] = std::move(run);
    }
    return runs;
}

std::string ev_ref(const LoadedRun& run, const EventMessage& e) {
    return run.file + ": event " + std::to_string(e.event_id) + " (t=" + std::to_string(e.t) + ")";
}

using Check = std::function<ScorecardItem(const std::map<std::string, LoadedRun>&)>;

ScorecardItem na(const std::string& why) { return {"not_applicable", why}; }
ScorecardItem fail(const std::string& why) { return {"fail", why}; }
ScorecardItem pass(const std::string& evidence) { return {"pass", evidence}; }

const LoadedRun* find(const std::map<std::string, LoadedRun>& runs, const std::string& name) {
    auto it = runs.find(name);
    return it == runs.end() ? nullptr : &it->second;
}

// Word-carrying SOUND events, optionally dropping permanent-name hits.
bool carries_word(const EventMessage& e, const std::string& skip_word = "") {
    if (e.kind != EventKind::SOUND || !e.heard || !e.heard->speech) return false;
    for (const auto& [w, t] : e.heard->speech->words)
        if (skip_word.empty() || w != skip_word) return true;
    return false;
}

ScorecardItem check_1a(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "localization_sides");
    if (!run) return na("no localization_sides run");
    bool left = false, right = false;
    std::string ev;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::SOUND || !e.heard) continue;
        if (e.heard->azimuth_deg < -30.0) { left = true; ev = ev_ref(*run, e); }
        if (e.heard->azimuth_deg > 30.0) right = true;
    }
    if (left && right) return pass("lateralization signs on both sides; " + ev);
    return fail("missing lateralized reports (left=" + std::to_string(left) +
                " right=" + std::to_string(right) + ")");
}

ScorecardItem check_1b(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "frequency_bands");
    if (!run) return na("no frequency_bands run");
    bool low = false, high = false;
    std::string ev;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::SOUND || !e.heard) continue;
        if (e.heard->category_id == "Mechanical/Vehicles") { low = true; ev = ev_ref(*run, e); }
        if (e.heard->category_id == "Natural/Birds") high = true;
    }
    if (low && high) return pass("low and high band sources both detected; " + ev);
    return fail("normal ear missed a band (low=" + std::to_string(low) +
                " high=" + std::to_string(high) + ")");
}

ScorecardItem check_1c(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "front_emphasis");
    if (!run || !run->scene_ok) return na("no front_emphasis run");
    // same source rendered front then side; front must report louder
    double front = -1e9, side = -1e9;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::SOUND || !e.heard) continue;
        if (e.t < 2.6)
            front = std::max(front, e.heard->loudness_db);
        else
            side = std::max(side, e.heard->loudness_db);
    }
    if (front > side + 1.0)
        return pass("front louder by " + std::to_string(front - side) + " dB");
    return fail("front emphasis not visible (front=" + std::to_string(front) +
                " side=" + std::to_string(side) + ")");
}

ScorecardItem check_1d(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "aged_ear");
    if (!run) return na("no aged_ear run");
    bool low = false, high = false;
    std::string ev;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::SOUND || !e.heard) continue;
        if (e.heard->centroid_hz < 1000.0) { low = true; ev = ev_ref(*run, e); }
        if (e.heard->centroid_hz > 4000.0) high = true;
    }
    if (low && !high)
        return pass("aged preset: low band heard, high band inaudible; " + ev);
    return fail("aged preset wrong (low=" + std::to_string(low) + " high=" + std::to_string(high) +
                ")");
}

ScorecardItem check_2a(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "localization_sides");
    if (!run || !run->scene_ok) return na("no localization_sides run");
    int matched = 0;
    std::string ev;
    for (const SoundSource& src : run->scene.sources) {
        const double truth_az = src.trajectory.front().azimuth_deg;
        const double truth_d = src.trajectory.front().distance_m;
        bool ok = false;
        for (const EventMessage& e : run->events) {
            if (e.kind != EventKind::SOUND || !e.heard) continue;
            if (e.t < src.onset_s || e.t > src.onset_s + src.duration_s + 1.0) continue;
            if (std::abs(wrap_deg(e.heard->azimuth_deg - truth_az)) > 20.0) continue;
            if (!e.heard->distance_m) continue;
            if (*e.heard->distance_m < 0.4 * truth_d || *e.heard->distance_m > 2.5 * truth_d)
                continue;
            ok = true;
            ev = ev_ref(*run, e);
            break;
        }
        if (ok) ++matched;
    }
    if (matched == static_cast<int>(run->scene.sources.size()))
        return pass("bearing and coarse distance recovered for every source; " + ev);
    return fail("only " + std::to_string(matched) + "/" +
                std::to_string(run->scene.sources.size()) + " sources localized");
}

ScorecardItem check_2b(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "name_call");
    if (!run) return na("no name_call run");
    std::set<int64_t> left_ids;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::SOUND || !e.heard) continue;
        if (e.heard->azimuth_deg < -10.0) left_ids.insert(e.heard->stream_id);
    }
    if (left_ids.size() == 1)
        return pass("speaker A held a single stream id through the noise");
    return fail("speaker A split across " + std::to_string(left_ids.size()) + " stream ids");
}

ScorecardItem check_found(const std::map<std::string, LoadedRun>& runs, const char* scenario,
                          const char* list_kind) {
    const LoadedRun* run = find(runs, scenario);
    if (!run) return na(std::string("no ") + scenario + " run");
    for (const EventMessage& e : run->events)
        if (e.kind == EventKind::FOUND && e.list_kind && *e.list_kind == list_kind)
            return pass(ev_ref(*run, e));
    return fail(std::string("no FOUND with list_kind ") + list_kind);
}

// Probe epochs from the scene's speech tokens; rate must fall, latency rise.
ScorecardItem check_2e(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "decay_probes");
    if (!run || !run->scene_ok) return na("no decay_probes run");
    if (run->meta.contains("config") && run->meta.at("config").value("super_ear", false))
        return na("super-ear mode: decay disabled");

    std::vector<double> probe_onsets;
    std::string word;
    for (const SoundSource& src : run->scene.sources) {
        if (!src.speech) continue;
        for (const WordToken& w : src.speech->words) {
            probe_onsets.push_back(src.onset_s + w.onset_s);
            word = w.w;
        }
    }
    if (probe_onsets.empty()) return fail("scene carries no probe words");
    std::sort(probe_onsets.begin(), probe_onsets.end());

    // epochs split on gaps > 60 s
    std::vector<std::pair<double, double>> epochs;
    double start = probe_onsets.front(), prev = probe_onsets.front();
    std::vector<std::vector<double>> epoch_probes(1);
    for (double t : probe_onsets) {
        if (t - prev > 60.0) {
            epochs.emplace_back(start, prev);
            epoch_probes.emplace_back();
            start = t;
        }
        epoch_probes.back().push_back(t);
        prev = t;
    }
    epochs.emplace_back(start, prev);
    if (epochs.size() < 2) return fail("fewer than two probe epochs");

    std::vector<double> rates, latencies;
    for (size_t i = 0; i < epochs.size(); ++i) {
        int hits = 0;
        double lat = 0.0;
        for (const EventMessage& e : run->events) {
            if (e.kind != EventKind::FOUND || !e.matched_entry || *e.matched_entry != word)
                continue;
            if (e.t < epochs[i].first || e.t > epochs[i].second + 3.0) continue;
            ++hits;
            double nearest = 1e18;
            for (double p : epoch_probes[i])
                if (e.t >= p) nearest = std::min(nearest, e.t - p);
            lat += nearest;
        }
        rates.push_back(static_cast<double>(hits) / epoch_probes[i].size());
        latencies.push_back(hits > 0 ? lat / hits : 1e9);
    }
    for (size_t i = 1; i < rates.size(); ++i) {
        if (rates[i] >= rates[i - 1])
            return fail("FOUND rate not decreasing: " + std::to_string(rates[i - 1]) + " -> " +
                        std::to_string(rates[i]));
        if (latencies[i] <= latencies[i - 1])
            return fail("FOUND latency not increasing");
    }
    return pass("rates " + std::to_string(rates.front()) + " -> " + std::to_string(rates.back()) +
                ", latency " + std::to_string(latencies.front()) + "s -> " +
                std::to_string(latencies.back()) + "s");
}

ScorecardItem check_2f(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "tracking_motion");
    if (!run) return na("no tracking_motion run");
    std::set<int64_t> ids;
    bool head_turned = false;
    for (const auto& c : run->commands)
        if (c.cmd == "TURN_HEAD") head_turned = true;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::SOUND || !e.heard) continue;
        if (e.heard->category_id.starts_with("HumanMade/Speech")) ids.insert(e.heard->stream_id);
    }
    if (!head_turned) return fail("scenario issued no head turn");
    if (ids.size() == 1)
        return pass("moving source kept one stream id through source and ear motion");
    return fail("track identity switched: " + std::to_string(ids.size()) + " ids");
}

ScorecardItem check_2g(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "doppler_flyby");
    if (!run || !run->scene_ok) return na("no doppler_flyby run");
    const double mid = run->scene.duration_s / 2.0;
    double approach_centroid = 0.0, recede_centroid = 0.0;
    int na_ = 0, nr = 0;
    bool categorized = true;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::SOUND || !e.heard) continue;
        if (e.heard->category_id != "Mechanical/Vehicles") categorized = false;
        if (e.t < mid) {
            approach_centroid += e.heard->centroid_hz;
            ++na_;
        } else {
            recede_centroid += e.heard->centroid_hz;
            ++nr;
        }
    }
    if (na_ == 0 || nr == 0) return fail("missing approach or recede reports");
    approach_centroid /= na_;
    recede_centroid /= nr;
    if (!categorized) return fail("classification lost under the frequency shift");
    if (approach_centroid > recede_centroid)
        return pass("centroid " + std::to_string(approach_centroid) + " Hz approaching vs " +
                    std::to_string(recede_centroid) + " Hz receding, category stable");
    return fail("no downward frequency step across the pass");
}

ScorecardItem check_4a(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "name_call");
    if (!run) return na("no name_call run");
    for (const EventMessage& e : run->events)
        if (e.kind == EventKind::INTERRUPT && e.matched_entry)
            return pass("name interrupt: " + ev_ref(*run, e));
    return fail("no INTERRUPT carrying the name");
}

ScorecardItem check_4b(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "name_call");
    if (!run) return na("no name_call run");
    double interrupt_t = 1e18;
    std::string name;
    for (const EventMessage& e : run->events) {
        if (e.kind == EventKind::INTERRUPT && e.matched_entry) {
            interrupt_t = e.t;
            name = *e.matched_entry;
            break;
        }
    }
    std::set<int64_t> word_streams;
    for (const EventMessage& e : run->events) {
        if (e.t >= interrupt_t) break;
        if (carries_word(e, name)) word_streams.insert(e.heard->stream_id);
    }
    if (word_streams.size() == 1)
        return pass("pre-interrupt word matches confined to the focused stream");
    return fail("word matches leaked across " + std::to_string(word_streams.size()) + " streams");
}

ScorecardItem check_4c(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "name_call");
    if (!run) return na("no name_call run");
    double interrupt_t = -1.0, focus_t = -1.0, refocus_t = -1.0;
    int64_t a_stream = -1, b_stream = -1;
    std::string name;
    for (const EventMessage& e : run->events) {
        if (e.kind == EventKind::INTERRUPT && e.matched_entry && interrupt_t < 0) {
            interrupt_t = e.t;
            name = *e.matched_entry;
            if (e.heard) b_stream = e.heard->stream_id;
        }
    }
    if (interrupt_t < 0) return fail("no interrupt");
    // agent reactions land on the same step edge, so ties count as after
    for (const auto& c : run->commands) {
        if (c.cmd == "FOCUS" && c.t >= interrupt_t && focus_t < 0) focus_t = c.t;
        if (c.cmd == "REFOCUS" && refocus_t < 0 && focus_t >= 0 && c.t >= focus_t) refocus_t = c.t;
    }
    if (focus_t < 0 || refocus_t < 0) return fail("focus switch commands missing");

    bool pre_a = false, mid_b = false, post_a = false;
    for (const EventMessage& e : run->events) {
        if (!carries_word(e, name)) continue;
        if (e.t < interrupt_t) {
            pre_a = true;
            a_stream = e.heard->stream_id;
        } else if (e.t > focus_t && e.t <= refocus_t && e.heard->stream_id == b_stream) {
            mid_b = true;
        } else if (e.t > refocus_t && a_stream >= 0 && e.heard->stream_id == a_stream) {
            post_a = true;
        }
    }
    if (pre_a && mid_b && post_a)
        return pass("order held: focused words, name interrupt, switch, refocus");
    return fail("sequence broken (pre=" + std::to_string(pre_a) + " mid=" + std::to_string(mid_b) +
                " post=" + std::to_string(post_a) + ")");
}

ScorecardItem check_5a(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "alarm_dedupe");
    if (!run) return na("no alarm_dedupe run");
    std::map<std::string, std::vector<const EventMessage*>> by_tpl;
    for (const EventMessage& e : run->events)
        if (e.kind == EventKind::ALARM && e.heard) by_tpl[e.heard->matched_template].push_back(&e);
    std::set<int64_t> ids;
    for (const auto& [tpl, evs] : by_tpl)
        for (const EventMessage* e : evs) ids.insert(e->heard->id);
    if (by_tpl.size() < 2) return fail("fewer than two alarm types delivered");
    if (ids.size() != by_tpl.size()) return fail("alarm ids not distinct per type");
    auto pump = by_tpl.find("pump_alarm");
    if (pump == by_tpl.end() || pump->second.size() != 1 ||
        pump->second.front()->heard->consolidation_count != 3)
        return fail("pump alarms not consolidated into one delivery of three");
    return pass("distinct ids per alarm type; pump trio consolidated (count 3)");
}

ScorecardItem check_5b(const std::map<std::string, LoadedRun>& runs) {
    const LoadedRun* run = find(runs, "alarm_dedupe");
    if (!run) return na("no alarm_dedupe run");
    bool novel = false, known = false;
    std::string ev;
    for (const EventMessage& e : run->events) {
        if (e.kind != EventKind::ALARM || !e.heard) continue;
        if (e.heard->novelty == Novelty::new_type) { novel = true; ev = ev_ref(*run, e); }
        if (e.heard->novelty == Novelty::known_type) known = true;
    }
    if (novel && known) return pass("known and new alarm types both flagged; " + ev);
    return fail("novelty flags wrong (new=" + std::to_string(novel) +
                " known=" + std::to_string(known) + ")");
}

} // namespace

const std::vector<std::string>& scorecard_item_ids() {
    static const std::vector<std::string> ids = {
        "1a", "1b", "1c", "1d", "2a", "2b", "2c", "2d", "2e", "2f",
        "2g", "3a", "3b", "3c", "4a", "4b", "4c", "5a", "5b",
    };
    return ids;
}

Scorecard evaluate_scorecard(const std::string& log_dir) {
    std::map<std::string, LoadedRun> runs = load_runs(log_dir);
    Scorecard card;
    const std::map<std::string, Check> checks = {
        {"1a", check_1a},
        {"1b", check_1b},
        {"1c", check_1c},
        {"1d", check_1d},
        {"2a", check_2a},
        {"2b", check_2b},
        {"2c", [](const auto& r) { return check_found(r, "target_lists", "short_term_primary"); }},
        {"2d",
         [](const auto& r) { return check_found(r, "target_lists", "short_term_secondary"); }},
        {"2e", check_2e},
        {"2f", check_2f},
        {"2g", check_2g},
        {"3a", [](const auto&) { return na("voice/gender/accent inference out of scope"); }},
        {"3b", [](const auto&) { return na("speaker identification out of scope"); }},
        {"3c", [](const auto&) { return na("speech-effect detection out of scope"); }},
        {"4a", check_4a},
        {"4b", check_4b},
        {"4c", check_4c},
        {"5a", check_5a},
        {"5b", check_5b},
    };
    for (const std::string& id : scorecard_item_ids()) card.items[id] = checks.at(id)(runs);
    return card;
}

std::string Scorecard::to_markdown() const {
    std::string out = "# Capability scorecard\n\n| item | verdict | evidence |\n|---|---|---|\n";
    for (const std::string& id : scorecard_item_ids()) {
        const ScorecardItem& item = items.at(id);
        out += "| " + id + " | " + item.verdict + " | " + item.evidence + " |\n";
    }
    return out;
}

nlohmann::json Scorecard::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, item] : items)
        j[id] = {{"verdict", item.verdict}, {"evidence", item.evidence}};
    return j;
}

bool Scorecard::all_in_scope_pass() const {
    for (const auto& [id, item] : items) {
        if (id == "3a" || id == "3b" || id == "3c") {
            if (item.verdict != "not_applicable") return false;
        } else if (item.verdict != "pass") {
            return false;
        }
    }
    return true;
}

} // namespace earsim
