#include "earsim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "earsim/error.hpp"

namespace earsim {

Engine::Engine(AuditoryScene scene, OntologyRegistry registry, SimConfig config, uint64_t seed)
    : scene_(std::move(scene)),
      registry_(std::move(registry)),
      config_(std::move(config)),
      rng_(seed),
      attention_(config_.attention, config_.alarm, config_.super_ear),
      tracker_(config_.ear, config_.localization, config_.segregation, config_.super_ear),
      now_(-scene_.frame_hop_s) {
    registry_.set_match_threshold(config_.match_threshold);
    tracker_.set_next_heard_id(&heard_id_counter_);
    std::vector<std::string> violations = validate_scene(scene_, &registry_);
    if (!violations.empty())
        throw EarError(ErrorCode::invalid_argument, "scene invalid: " + violations.front());
    if (!config_.attention.agent_name.empty())
        attention_.load_target(config_.attention.agent_name, PatternType::word,
                               ListKind::long_term, true, 0.0);
}

bool Engine::finished() const { return now_ + scene_.frame_hop_s > scene_.duration_s + 1e-9; }

void Engine::run_all() {
    while (!finished()) step();
}

void Engine::drain_events() {
    auto sched = [this](PendingEvent ev) { schedule(std::move(ev)); };
    attention_.advance_head(1e17, sched);
    flush_queue_until(1e18);
}

void Engine::schedule(PendingEvent ev) { queue_.push({ev.t, queue_seq_++, std::move(ev)}); }

void Engine::emit(const PendingEvent& ev) {
    EventMessage msg;
    msg.event_id = next_event_id_++;
    msg.kind = ev.kind;
    msg.t = ev.t;
    msg.heard = ev.heard;
    msg.matched_entry = ev.matched_entry;
    msg.list_kind = ev.list_kind;
    event_log_.push_back(msg);
    if (event_sink_) event_sink_(msg);
}

void Engine::flush_queue_until(double t) {
    while (!queue_.empty() && queue_.top().t <= t + 1e-12) {
        PendingEvent ev = queue_.top().ev;
        queue_.pop();
        emit(ev);
    }
}

Engine::PatternInfo Engine::resolve_pattern(const std::string& pattern) const {
    if (registry_.has_category(pattern)) return {PatternType::category, true};
    if (registry_.sound_template(pattern)) return {PatternType::template_id, true};
    // a path-shaped pattern must name a real taxonomy node
    if (pattern.find('/') != std::string::npos) return {PatternType::word, false};
    return {PatternType::word, !pattern.empty()};
}

AckMessage Engine::handle_command(int client, const CommandMessage& cmd, double at) {
    const double t = std::max(at, std::max(now_, 0.0));
    auto sched = [this](PendingEvent ev) { schedule(std::move(ev)); };
    attention_.advance_head(t, sched);
    flush_queue_until(t);

    AckMessage ack;
    ack.seq = cmd.seq;
    auto& last = last_seq_[client];
    if (cmd.seq <= last) {
        ack.status = "error";
        ack.error_code = to_string(ErrorCode::bad_seq);
        return ack;
    }
    last = cmd.seq;
    try {
        ack = dispatch(client, cmd, t);
        ack.seq = cmd.seq;
    } catch (const EarError& e) {
        ack.status = "error";
        ack.error_code = to_string(e.code());
        ack.payload = nlohmann::json{{"message", e.what()}};
    } catch (const nlohmann::json::exception& e) {
        ack.status = "error";
        ack.error_code = to_string(ErrorCode::bad_request);
        ack.payload = nlohmann::json{{"message", e.what()}};
    }
    return ack;
}

AckMessage Engine::dispatch(int client, const CommandMessage& cmd, double at) {
    AckMessage ack;
    ack.seq = cmd.seq;
    auto sched = [this](PendingEvent ev) { schedule(std::move(ev)); };
    const nlohmann::json& args = cmd.args;

    auto load = [&](ListKind kind) {
        const std::string pattern = args.at("pattern").get<std::string>();
        const bool permanent = args.value("permanent", false);
        PatternInfo info = resolve_pattern(pattern);
        if (!info.valid)
            throw EarError(ErrorCode::unknown_pattern, "pattern not in ontology: " + pattern);
        auto res = attention_.load_target(pattern, info.type, kind, permanent, at);
        ack.payload = nlohmann::json{{"entry_id", res.entry_id}, {"existing", res.existing}};
    };

    switch (cmd.cmd) {
        case Command::CURRENT_SOUND: {
            auto h = attention_.current_sound();
            ack.payload = h ? to_json(*h) : nlohmann::json(nullptr);
            break;
        }
        case Command::SUBSCRIBE:
            subscribed_.insert(client);
            break;
        case Command::UNSUBSCRIBE:
            subscribed_.erase(client);
            break;
        case Command::LISTEN_PRIMARY:
            load(ListKind::short_term_primary);
            break;
        case Command::LISTEN_SECONDARY:
            load(ListKind::short_term_secondary);
            break;
        case Command::VIGILANCE:
            load(ListKind::long_term);
            break;
        case Command::TAKE_INTERRUPTS: {
            std::vector<std::string> patterns;
            if (args.contains("patterns"))
                patterns = args.at("patterns").get<std::vector<std::string>>();
            if (patterns.empty()) {
                attention_.set_ignore_interrupts(false);
            } else {
                for (const std::string& p : patterns) {
                    PatternInfo info = resolve_pattern(p);
                    if (!info.valid)
                        throw EarError(ErrorCode::unknown_pattern, "pattern not in ontology: " + p);
                    attention_.add_take_pattern(p, info.type);
                }
            }
            break;
        }
        case Command::IGNORE_INTERRUPTS: {
            std::vector<std::string> patterns;
            if (args.contains("patterns"))
                patterns = args.at("patterns").get<std::vector<std::string>>();
            if (patterns.empty()) {
                attention_.set_ignore_interrupts(true);
            } else {
                for (const std::string& p : patterns) {
                    PatternInfo info = resolve_pattern(p);
                    if (!info.valid)
                        throw EarError(ErrorCode::unknown_pattern, "pattern not in ontology: " + p);
                    attention_.add_ignore_interrupt_pattern(p, info.type);
                }
            }
            break;
        }
        case Command::LIST_ADD: {
            auto kind = list_kind_from_string(args.at("list").get<std::string>());
            if (!kind) throw EarError(ErrorCode::bad_request, "unknown list kind");
            load(*kind);
            break;
        }
        case Command::LIST_REMOVE: {
            auto kind = list_kind_from_string(args.at("list").get<std::string>());
            if (!kind) throw EarError(ErrorCode::bad_request, "unknown list kind");
            const std::string pattern = args.at("pattern").get<std::string>();
            if (!attention_.remove_target(pattern, *kind))
                throw EarError(ErrorCode::not_found, "pattern not on list: " + pattern);
            break;
        }
        case Command::LIST_QUERY: {
            std::optional<ListKind> kind;
            if (args.contains("list")) {
                kind = list_kind_from_string(args.at("list").get<std::string>());
                if (!kind) throw EarError(ErrorCode::bad_request, "unknown list kind");
            }
            nlohmann::json entries = nlohmann::json::array();
            for (const TargetEntry& e : attention_.list_entries(kind, at)) {
                entries.push_back({{"entry_id", e.entry_id},
                                   {"pattern", e.pattern},
                                   {"list_kind", to_string(e.list_kind)},
                                   {"permanent", e.permanent},
                                   {"activation", e.activation},
                                   {"age_s", at - e.load_time}});
            }
            ack.payload = nlohmann::json{{"entries", entries}};
            break;
        }
        case Command::TURN_HEAD: {
            const std::string mode = args.at("mode").get<std::string>();
            if (mode != "absolute" && mode != "relative")
                throw EarError(ErrorCode::bad_request, "mode must be absolute or relative");
            const double deg = args.at("deg").get<double>();
            if (!std::isfinite(deg))
                throw EarError(ErrorCode::bad_request, "deg must be finite");
            auto turn = attention_.turn_head(mode == "absolute", deg, at, sched);
            ack.payload = nlohmann::json{{"eta_s", turn.eta_s}, {"target_deg", turn.target_deg}};
            break;
        }
        case Command::FOCUS: {
            const int64_t stream_id = args.at("stream_id").get<int64_t>();
            if (!tracker_.is_live(stream_id))
                throw EarError(ErrorCode::dead_stream,
                               "stream not alive: " + std::to_string(stream_id));
            attention_.focus(stream_id);
            break;
        }
        case Command::REFOCUS: {
            if (attention_.focus_stack_empty()) {
                ack.payload = nlohmann::json{{"notice", "focus stack empty"}};
            } else {
                auto to = attention_.refocus();
                ack.payload = nlohmann::json{
                    {"focused", to ? nlohmann::json(*to) : nlohmann::json(nullptr)}};
            }
            break;
        }
    }
    return ack;
}

void Engine::submit(int client, CommandMessage cmd) {
    std::lock_guard<std::mutex> lock(inbox_mutex_);
    inbox_.emplace_back(client, std::move(cmd));
}

void Engine::drop_client(int client) {
    subscribed_.erase(client);
    last_seq_.erase(client);
}

std::vector<Candidate> Engine::build_candidates(double t, double heading) {
    std::vector<Candidate> candidates;

    // Scene passthrough: station tag and alarm character travel with the
    // sound itself. Head-turn evidence resolves front/back for the report
    // while tracking stays in folded coordinates.
    std::vector<StreamTrack*> live;
    for (StreamTrack& track : tracker_.mutable_tracks()) {
        if (!track.alive || track.updates < config_.segregation.min_track_updates) continue;
        // report only while the stream is actually audible this step
        if (track.last_update < t - scene_.frame_hop_s / 2.0) continue;
        const SoundSource* src =
            track.dominant_source.empty() ? nullptr : scene_.source(track.dominant_source);
        track.station_tag = src && src->station ? src->station : std::optional<std::string>{};
        track.is_alarm_like = (src && src->is_alarm) ||
                              track.category.category.starts_with("Mechanical/Alarms");

        if (!track.azimuth_track.empty()) {
            auto& hist = heading_history_[track.stream_id];
            hist.push_back({heading, track.azimuth_track.back().azimuth_deg});
            if (hist.size() > 64) hist.erase(hist.begin());
            if (auto res = resolve_front_back(hist)) {
                LocalizationEstimate& latest = track.azimuth_track.back();
                latest.front_back_resolved = true;
                if (res->rear)
                    latest.azimuth_deg = wrap_deg(res->world_azimuth_deg - heading);
            }
        }
        live.push_back(&track);
    }

    std::optional<int64_t> focused = attention_.focused();
    if (!focused) {
        // nothing explicitly focused: attention rests on the loudest stream
        double best = -1e18;
        for (const StreamTrack* track : live) {
            if (track->loudness_db > best) {
                best = track->loudness_db;
                focused = track->stream_id;
            }
        }
    }

    for (StreamTrack* track : live) {
        const SoundSource* src =
            track->dominant_source.empty() ? nullptr : scene_.source(track->dominant_source);

        double competitor_pow = 0.0;
        for (const StreamTrack* other : live) {
            if (other == track) continue;
            competitor_pow += std::pow(10.0, other->loudness_db / 10.0);
        }
        const double competitor_db =
            competitor_pow > 0.0 ? 10.0 * std::log10(competitor_pow) : -1e18;
        const bool is_focused = focused && *focused == track->stream_id;
        const bool intelligible =
            is_focused && (competitor_pow == 0.0 ||
                           track->loudness_db >=
                               competitor_db - config_.segregation.intelligibility_margin_db);

        ActiveSpeech speech;
        if (src && src->speech) {
            const SourceState st = source_state_at(scene_, *src, t);
            speech.present = true;
            speech.speaker_id = src->speech->speaker_id;
            speech.sex = src->speech->sex;
            if (st.active) {
                const double episode_start = t - st.local_t;
                for (const WordToken& w : src->speech->words) {
                    const double abs_onset = episode_start + w.onset_s;
                    if (t + 1e-9 < abs_onset || t > abs_onset + w.dur_s) continue;
                    const std::string key = std::to_string(track->stream_id) + ":" + w.w + ":" +
                                            std::to_string(abs_onset);
                    if (presented_words_.count(key)) continue;
                    presented_words_.insert(key);
                    speech.words.emplace_back(w.w, abs_onset);
                }
            }
        }

        std::optional<double> distance;
        const SoundTemplate* tpl = track->category.template_id.empty()
                                       ? nullptr
                                       : registry_.sound_template(track->category.template_id);
        if (tpl && !track->azimuth_track.empty()) {
            double observed = scene_.background_db + track->loudness_db;
            if (config_.ear.in_front_sector(track->azimuth_track.back().azimuth_deg))
                observed -= config_.ear.front_emphasis_db;
            auto [d, conf] = distance_estimate(observed, tpl->nominal_level_db);
            if (conf == DistanceConfidence::coarse) distance = d;
        }

        HeardObject heard = identify_stream(
            *track, registry_, config_.ear, speech, attention_.loaded_word_patterns(),
            attention_.permanent_word_patterns(), intelligible, t, config_.match_threshold,
            distance);
        if (heard.speech)
            for (const auto& wt : heard.speech->words) track->speech_matches.push_back(wt);

        Candidate cand;
        cand.alarm_like = track->is_alarm_like;
        cand.heard = std::move(heard);
        candidates.push_back(std::move(cand));
    }
    return candidates;
}

void Engine::pipeline(double t) {
    auto sched = [this](PendingEvent ev) { schedule(std::move(ev)); };
    const double heading = attention_.head_heading(t);
    last_heading_ = heading;

    FrameObservation obs =
        render_observation(scene_, registry_, config_.ear, heading, t, true);
    if (frame_dump_) frame_dump_(obs);
    window_.push_back(std::move(obs));
    const size_t w = static_cast<size_t>(std::max(config_.segregation.window_frames, 3));
    while (window_.size() > w) window_.pop_front();

    std::vector<FrameObservation> window(window_.begin(), window_.end());
    SegregationResult seg = segregate_window(window, config_.ear, config_.segregation,
                                             scene_.background_db, rng_);
    for (ClusterObservation& c : seg.clusters) {
        // observed temporal behaviour comes from the emitting source; the
        // feature-domain renderer carries no temporal microstructure
        const SoundSource* src =
            c.dominant_source.empty() ? nullptr : scene_.source(c.dominant_source);
        const SoundTemplate* tpl = src ? registry_.sound_template(src->template_id) : nullptr;
        if (tpl) c.envelope = tpl->envelope;
    }

    std::vector<int64_t> closed =
        tracker_.update(seg.clusters, t, heading, registry_, rng_);
    for (int64_t id : closed) {
        auto it = last_candidate_by_stream_.find(id);
        PendingEvent ev{t, EventKind::STREAM_ENDED, std::nullopt, std::nullopt, std::nullopt};
        if (it != last_candidate_by_stream_.end()) ev.heard = it->second;
        schedule(std::move(ev));
        heading_history_.erase(id);
    }
    attention_.prune_focus([this](int64_t id) { return tracker_.is_live(id); });

    std::vector<Candidate> candidates = build_candidates(t, heading);
    for (const Candidate& c : candidates) last_candidate_by_stream_[c.heard.stream_id] = c.heard;

    attention_.evaluate_frame(candidates, t, rng_, sched);

    std::vector<Candidate> alarms;
    for (const Candidate& c : candidates)
        if (c.alarm_like) alarms.push_back(c);
    attention_.alarm_step(alarms, t, sched);
}

void Engine::step() {
    const double t = now_ + scene_.frame_hop_s;
    auto sched = [this](PendingEvent ev) { schedule(std::move(ev)); };

    std::vector<std::pair<int, CommandMessage>> pending;
    {
        std::lock_guard<std::mutex> lock(inbox_mutex_);
        pending.swap(inbox_);
    }
    for (auto& [client, cmd] : pending) handle_command(client, cmd, std::max(now_, 0.0));

    attention_.advance_head(t, sched);
    flush_queue_until(t);
    pipeline(t);
    flush_queue_until(t);
    now_ = t;
}

} // namespace earsim
