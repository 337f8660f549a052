#include "earsim/attention.hpp"

#include <algorithm>
#include <cmath>

#include "earsim/error.hpp"

namespace earsim {

namespace {
constexpr double kEventEpsilon = 1e-6; // keeps command-triggered events strictly after the ack
}

const char* to_string(ListKind kind) {
    switch (kind) {
        case ListKind::short_term_primary: return "short_term_primary";
        case ListKind::short_term_secondary: return "short_term_secondary";
        case ListKind::long_term: return "long_term";
        case ListKind::ignored: return "ignored";
    }
    return "short_term_primary";
}

std::optional<ListKind> list_kind_from_string(const std::string& s) {
    if (s == "short_term_primary") return ListKind::short_term_primary;
    if (s == "short_term_secondary") return ListKind::short_term_secondary;
    if (s == "long_term") return ListKind::long_term;
    if (s == "ignored") return ListKind::ignored;
    return std::nullopt;
}

AttentionState::AttentionState(const AttentionConfig& config, const AlarmConfig& alarm,
                               bool super_ear)
    : config_(config), alarm_config_(alarm), super_ear_(super_ear) {
    for (const std::string& id : alarm.preprogrammed) known_alarm_types_.insert(id);
}

double AttentionState::half_life(ListKind kind) const {
    return kind == ListKind::long_term ? config_.half_life_long_s : config_.half_life_short_s;
}

AttentionState::LoadResult AttentionState::load_target(const std::string& pattern,
                                                       PatternType type, ListKind kind,
                                                       bool permanent, double now) {
    for (TargetEntry& e : entries_) {
        if (e.pattern == pattern && e.list_kind == kind) {
            e.load_time = now; // reload refreshes the entry
            e.activation = 1.0;
            return {e.entry_id, true};
        }
    }
    if (!permanent &&
        (kind == ListKind::short_term_primary || kind == ListKind::short_term_secondary)) {
        int used = 0;
        for (const TargetEntry& e : entries_)
            if (!e.permanent && (e.list_kind == ListKind::short_term_primary ||
                                 e.list_kind == ListKind::short_term_secondary))
                ++used;
        if (used >= config_.short_term_capacity)
            throw EarError(ErrorCode::capacity_full, "short-term lists at capacity");
    }
    TargetEntry e;
    e.entry_id = next_entry_id_++;
    e.pattern = pattern;
    e.type = type;
    e.list_kind = kind;
    e.permanent = permanent;
    e.load_time = now;
    e.activation = 1.0;
    entries_.push_back(e);
    return {e.entry_id, false};
}

bool AttentionState::remove_target(const std::string& pattern, ListKind kind) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const TargetEntry& e) {
        return e.pattern == pattern && e.list_kind == kind;
    });
    if (it == entries_.end()) return false;
    entries_.erase(it); // explicit removal overrides permanence
    return true;
}

std::vector<TargetEntry> AttentionState::list_entries(std::optional<ListKind> kind, double now) {
    decay_to(now);
    std::vector<TargetEntry> out;
    for (const TargetEntry& e : entries_)
        if (!kind || e.list_kind == *kind) out.push_back(e);
    return out;
}

void AttentionState::decay_to(double now) {
    for (TargetEntry& e : entries_) {
        if (e.permanent || super_ear_) {
            e.activation = 1.0;
            continue;
        }
        const double lambda = std::log(2.0) / half_life(e.list_kind);
        e.activation = std::exp(-lambda * std::max(0.0, now - e.load_time));
    }
}

double AttentionState::recognition_probability(const TargetEntry& entry) const {
    if (super_ear_) return 1.0;
    const double a = entry.permanent ? 1.0 : entry.activation;
    return 1.0 / (1.0 + std::exp(-(a - config_.recognition_theta) / config_.recognition_slope));
}

double AttentionState::recognition_latency(const TargetEntry& entry) const {
    if (super_ear_) return config_.base_latency_s;
    const double a = entry.permanent ? 1.0 : entry.activation;
    return config_.base_latency_s + config_.latency_gain_s * (1.0 - a);
}

void AttentionState::add_take_pattern(const std::string& pattern, PatternType type) {
    take_patterns_.emplace_back(pattern, type);
}

void AttentionState::add_ignore_interrupt_pattern(const std::string& pattern, PatternType type) {
    ignore_patterns_.emplace_back(pattern, type);
}

void AttentionState::focus(int64_t stream_id) {
    if (!focus_stack_.empty() && focus_stack_.back() == stream_id) return;
    focus_stack_.push_back(stream_id);
}

std::optional<int64_t> AttentionState::refocus() {
    if (focus_stack_.empty()) return std::nullopt;
    focus_stack_.pop_back();
    if (focus_stack_.empty()) return std::nullopt;
    return focus_stack_.back();
}

std::optional<int64_t> AttentionState::focused() const {
    if (focus_stack_.empty()) return std::nullopt;
    return focus_stack_.back();
}

void AttentionState::prune_focus(const std::function<bool(int64_t)>& alive) {
    std::erase_if(focus_stack_, [&](int64_t id) { return !alive(id); });
}

AttentionState::TurnAck AttentionState::turn_head(bool absolute, double degrees, double now,
                                                  const EventSchedule& schedule) {
    const double here = head_heading(now);
    if (turn_ && now < turn_->done_t) {
        schedule({now + kEventEpsilon, EventKind::HEAD_CANCELLED, std::nullopt, std::nullopt,
                  std::nullopt});
    }
    const double target = absolute ? wrap_deg(degrees) : wrap_deg(here + degrees);
    const double arc = wrap_deg(target - here);
    Turn t;
    t.start_t = now;
    t.start_heading = here;
    t.target = target;
    t.direction = arc >= 0.0 ? 1.0 : -1.0;
    const double duration = std::abs(arc) / config_.turn_rate_deg_per_s;
    t.done_t = now + std::max(duration, kEventEpsilon);
    turn_ = t;
    return {duration, target};
}

double AttentionState::head_heading(double t) const {
    if (!turn_) return heading_deg_;
    if (t >= turn_->done_t) return turn_->target;
    if (t <= turn_->start_t) return turn_->start_heading;
    return wrap_deg(turn_->start_heading +
                    turn_->direction * config_.turn_rate_deg_per_s * (t - turn_->start_t));
}

void AttentionState::advance_head(double t, const EventSchedule& schedule) {
    if (turn_ && t >= turn_->done_t) {
        heading_deg_ = turn_->target;
        schedule({turn_->done_t, EventKind::HEAD_DONE, std::nullopt, std::nullopt, std::nullopt});
        turn_.reset();
    }
}

bool AttentionState::pattern_matches(const std::string& pattern, PatternType type,
                                     const HeardObject& heard) {
    switch (type) {
        case PatternType::category:
            return heard.category_id == pattern ||
                   heard.category_id.starts_with(pattern + "/");
        case PatternType::template_id:
            return heard.matched_template == pattern;
        case PatternType::word:
            if (!heard.speech) return false;
            for (const auto& [w, t] : heard.speech->words)
                if (w == pattern) return true;
            return false;
    }
    return false;
}

bool AttentionState::entry_matches(const TargetEntry& entry, const HeardObject& heard) const {
    return pattern_matches(entry.pattern, entry.type, heard);
}

bool AttentionState::interrupt_blocked(const HeardObject& heard) const {
    for (const auto& [p, t] : ignore_patterns_)
        if (pattern_matches(p, t, heard)) return true;
    if (!ignore_interrupts_) return false;
    for (const auto& [p, t] : take_patterns_)
        if (pattern_matches(p, t, heard)) return false;
    return true;
}

void AttentionState::evaluate_frame(const std::vector<Candidate>& candidates, double now,
                                    std::mt19937_64& rng, const EventSchedule& schedule) {
    decay_to(now);
    current_sound_.reset();
    double loudest = -1e9;

    for (const Candidate& cand : candidates) {
        const HeardObject& heard = cand.heard;

        // (a) the ignored list silences a candidate entirely
        bool suppressed = false;
        for (const TargetEntry& e : entries_) {
            if (e.list_kind == ListKind::ignored && entry_matches(e, heard)) {
                suppressed = true;
                break;
            }
        }
        if (suppressed) continue;

        // (b) endogenous recognition against the target lists
        for (const TargetEntry& e : entries_) {
            if (e.list_kind == ListKind::ignored) continue;
            if (!entry_matches(e, heard)) continue;
            // word targets re-arm per utterance, sound targets per object
            std::vector<std::string> occurrences;
            if (e.type == PatternType::word && heard.speech) {
                for (const auto& [w, wt] : heard.speech->words)
                    if (w == e.pattern)
                        occurrences.push_back(std::to_string(e.entry_id) + ":" +
                                              std::to_string(heard.id) + ":" +
                                              std::to_string(wt));
            } else {
                occurrences.push_back(std::to_string(e.entry_id) + ":" +
                                      std::to_string(heard.id));
            }
            for (const std::string& key : occurrences) {
                if (recognition_attempted_.count(key)) continue;
                recognition_attempted_.insert(key);
                const double p = recognition_probability(e);
                std::uniform_real_distribution<double> u(0.0, 1.0);
                if (u(rng) < p) {
                    metrics_.found_events++;
                    schedule({now + recognition_latency(e), EventKind::FOUND, heard, e.pattern,
                              std::string(to_string(e.list_kind))});
                }
            }
        }

        // (c) exogenous capture: loud sounds, alarm-like sounds, the name
        const bool loud = heard.loudness_db >= config_.exogenous_threshold_db;
        std::vector<std::string> name_hits;
        if (heard.speech) {
            for (const auto& [w, wt] : heard.speech->words) {
                for (const TargetEntry& e : entries_) {
                    if (e.permanent && e.type == PatternType::word && e.pattern == w &&
                        e.list_kind != ListKind::ignored) {
                        name_hits.push_back(w + "@" + std::to_string(wt));
                        break;
                    }
                }
            }
        }
        if ((loud || cand.alarm_like || !name_hits.empty()) && !interrupt_blocked(heard)) {
            if (loud || cand.alarm_like) {
                const std::string key = "exo:" + std::to_string(heard.id);
                if (!emitted_interrupt_keys_.count(key)) {
                    emitted_interrupt_keys_.insert(key);
                    metrics_.interrupt_events++;
                    schedule({now, EventKind::INTERRUPT, heard, std::nullopt, std::nullopt});
                }
            }
            for (const std::string& hit : name_hits) {
                const std::string key = "name:" + std::to_string(heard.id) + ":" + hit;
                if (emitted_interrupt_keys_.count(key)) continue;
                emitted_interrupt_keys_.insert(key);
                metrics_.interrupt_events++;
                const std::string word = hit.substr(0, hit.find('@'));
                schedule({now, EventKind::INTERRUPT, heard, word, std::nullopt});
            }
        }

        // (d) the current-sound feed carries every non-suppressed candidate
        metrics_.sound_events++;
        schedule({now, EventKind::SOUND, heard, std::nullopt, std::nullopt});
        if (heard.loudness_db > loudest) {
            loudest = heard.loudness_db;
            current_sound_ = heard;
        }
    }
}

std::string AttentionState::alarm_key(const HeardObject& heard) const {
    if (!heard.matched_template.empty()) return heard.matched_template;
    if (heard.category_id != "Miscellaneous/Unknown") return heard.category_id;
    // unclassified alarms consolidate by coarse pitch, not as one blanket type
    const int bucket = static_cast<int>(heard.centroid_hz / 200.0);
    return "unknown@" + std::to_string(bucket);
}

int64_t AttentionState::trailing_alarm_count(double now) const {
    int64_t n = 0;
    for (double t : alarm_delivery_times_)
        if (t > now - 60.0) ++n;
    return n;
}

void AttentionState::alarm_step(const std::vector<Candidate>& alarm_candidates, double now,
                                const EventSchedule& schedule) {
    // (a) station filter, then (b) consolidation buffering
    for (const Candidate& cand : alarm_candidates) {
        const HeardObject& heard = cand.heard;
        if (!alarm_config_.own_station.empty() && heard.station_tag &&
            *heard.station_tag != alarm_config_.own_station) {
            metrics_.alarms_dropped_station++;
            continue;
        }
        if (heard.loudness_db < alarm_config_.station_threshold_db) {
            metrics_.alarms_dropped_quiet++;
            continue;
        }
        if (consumed_alarm_heard_ids_.count(heard.id)) continue;

        const std::string key = alarm_key(heard);
        PendingAlarm* pending = nullptr;
        for (PendingAlarm& p : consolidating_)
            if (p.key == key) { pending = &p; break; }
        if (pending) {
            if (!pending->seen_heard_ids.count(heard.id)) {
                pending->seen_heard_ids.insert(heard.id);
                pending->heard.consolidation_count++;
                pending->loudness = std::max(pending->loudness, heard.loudness_db);
                metrics_.alarms_consolidated++;
            }
            consumed_alarm_heard_ids_.insert(heard.id);
            continue;
        }
        PendingAlarm p;
        p.key = key;
        p.heard = heard;
        p.heard.consolidation_count = 1;
        p.deadline = now + alarm_config_.consolidation_window_s;
        p.loudness = heard.loudness_db;
        // (c) novelty: unknown type or a type the ear was not programmed with
        p.novel = heard.novelty == Novelty::new_type || !known_alarm_types_.count(key);
        p.arrival_seq = alarm_arrival_seq_++;
        p.seen_heard_ids.insert(heard.id);
        consumed_alarm_heard_ids_.insert(heard.id);
        consolidating_.push_back(std::move(p));
    }

    // move ripe consolidation windows into the delivery queue
    for (auto it = consolidating_.begin(); it != consolidating_.end();) {
        if (now >= it->deadline) {
            delivery_queue_.push_back(std::move(*it));
            it = consolidating_.erase(it);
        } else {
            ++it;
        }
    }

    // (d) priority: unknown types first, then loudness descending
    std::sort(delivery_queue_.begin(), delivery_queue_.end(),
              [](const PendingAlarm& a, const PendingAlarm& b) {
                  if (a.novel != b.novel) return a.novel;
                  if (a.loudness != b.loudness) return a.loudness > b.loudness;
                  return a.arrival_seq < b.arrival_seq;
              });

    // (e) rate cap: never more than the cap in any trailing 60 s window
    while (!delivery_queue_.empty()) {
        if (trailing_alarm_count(now) >= alarm_config_.rate_cap_per_min) {
            for (PendingAlarm& p : delivery_queue_) {
                if (!p.deferred_counted) {
                    p.deferred_counted = true;
                    metrics_.alarms_deferred++;
                }
            }
            break;
        }
        PendingAlarm p = std::move(delivery_queue_.front());
        delivery_queue_.erase(delivery_queue_.begin());
        HeardObject delivered = p.heard;
        delivered.novelty = p.novel ? Novelty::new_type : Novelty::known_type;
        known_alarm_types_.insert(p.key);
        alarm_delivery_times_.push_back(now);
        while (!alarm_delivery_times_.empty() && alarm_delivery_times_.front() <= now - 120.0)
            alarm_delivery_times_.pop_front();
        metrics_.alarms_delivered++;
        if (trailing_alarm_count(now) > alarm_config_.watermark_per_min)
            metrics_.alarm_watermark_exceeded = true;
        schedule({now, EventKind::ALARM, delivered, std::nullopt, std::nullopt});
    }
}

std::vector<std::string> AttentionState::loaded_word_patterns() const {
    std::vector<std::string> out;
    for (const TargetEntry& e : entries_)
        if (e.type == PatternType::word && e.list_kind != ListKind::ignored)
            out.push_back(e.pattern);
    return out;
}

std::vector<std::string> AttentionState::permanent_word_patterns() const {
    std::vector<std::string> out;
    for (const TargetEntry& e : entries_)
        if (e.type == PatternType::word && e.permanent && e.list_kind != ListKind::ignored)
            out.push_back(e.pattern);
    return out;
}

} // namespace earsim
