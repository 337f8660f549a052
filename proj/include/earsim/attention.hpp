#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "earsim/config.hpp"
#include "earsim/messages.hpp"

namespace earsim {

enum class ListKind { short_term_primary, short_term_secondary, long_term, ignored };
const char* to_string(ListKind kind);
std::optional<ListKind> list_kind_from_string(const std::string& s);

enum class PatternType { category, template_id, word };

struct TargetEntry {
    int64_t entry_id = 0;
    std::string pattern;
    PatternType type = PatternType::word;
    ListKind list_kind = ListKind::short_term_primary;
    bool permanent = false;
    double load_time = 0.0;
    double activation = 1.0; // (0, 1]; pinned at 1 while permanent
};

// A stream candidate as the engine hands it to the state machine.
struct Candidate {
    HeardObject heard;
    bool alarm_like = false;
};

// Event not yet assigned an id; the engine timestamps and logs at emission.
struct PendingEvent {
    double t = 0.0;
    EventKind kind = EventKind::SOUND;
    std::optional<HeardObject> heard;
    std::optional<std::string> matched_entry;
    std::optional<std::string> list_kind;
};

using EventSchedule = std::function<void(PendingEvent)>;

struct AttentionMetrics {
    int64_t alarms_delivered = 0;
    int64_t alarms_deferred = 0;
    int64_t alarms_dropped_station = 0;
    int64_t alarms_dropped_quiet = 0;
    int64_t alarms_consolidated = 0;
    bool alarm_watermark_exceeded = false; // trailing rate passed the soft 15/min mark
    int64_t found_events = 0;
    int64_t interrupt_events = 0;
    int64_t sound_events = 0;
};

// The preprocessor state machine: target lists with decay, the focus stack,
// interrupt policy, the alarm pipeline and head control.
class AttentionState {
public:
    AttentionState(const AttentionConfig& config, const AlarmConfig& alarm, bool super_ear);

    // --- target lists -----------------------------------------------------
    struct LoadResult {
        int64_t entry_id = 0;
        bool existing = false;
    };
    // Throws EarError(capacity_full) when the combined short-term lists are
    // at capacity (permanent entries do not count).
    LoadResult load_target(const std::string& pattern, PatternType type, ListKind kind,
                           bool permanent, double now);
    bool remove_target(const std::string& pattern, ListKind kind); // explicit removal
    std::vector<TargetEntry> list_entries(std::optional<ListKind> kind, double now);
    void decay_to(double now);

    double recognition_probability(const TargetEntry& entry) const;
    double recognition_latency(const TargetEntry& entry) const;

    // --- interrupt policy ---------------------------------------------------
    void set_ignore_interrupts(bool on) { ignore_interrupts_ = on; }
    bool ignore_interrupts() const { return ignore_interrupts_; }
    void add_take_pattern(const std::string& pattern, PatternType type);
    void add_ignore_interrupt_pattern(const std::string& pattern, PatternType type);

    // --- focus stack --------------------------------------------------------
    void focus(int64_t stream_id);
    std::optional<int64_t> refocus(); // popped-to stream; nullopt on empty stack
    std::optional<int64_t> focused() const;
    bool focus_stack_empty() const { return focus_stack_.empty(); }
    void prune_focus(const std::function<bool(int64_t)>& alive);

    // --- head ---------------------------------------------------------------
    struct TurnAck {
        double eta_s = 0.0;
        double target_deg = 0.0;
    };
    TurnAck turn_head(bool absolute, double degrees, double now, const EventSchedule& schedule);
    double head_heading(double t) const;
    // Emits the pending HEAD_DONE once the clock passes its completion time.
    void advance_head(double t, const EventSchedule& schedule);

    // --- evaluation ----------------------------------------------------------
    void evaluate_frame(const std::vector<Candidate>& candidates, double now,
                        std::mt19937_64& rng, const EventSchedule& schedule);
    void alarm_step(const std::vector<Candidate>& alarm_candidates, double now,
                    const EventSchedule& schedule);

    std::optional<HeardObject> current_sound() const { return current_sound_; }
    void clear_current_sound() { current_sound_.reset(); }

    std::vector<std::string> loaded_word_patterns() const;
    std::vector<std::string> permanent_word_patterns() const;

    const AttentionMetrics& metrics() const { return metrics_; }
    const std::set<std::string>& known_alarm_types() const { return known_alarm_types_; }
    int64_t trailing_alarm_count(double now) const;

private:
    AttentionConfig config_;
    AlarmConfig alarm_config_;
    bool super_ear_;

    std::vector<TargetEntry> entries_;
    int64_t next_entry_id_ = 1;

    bool ignore_interrupts_ = false;
    std::vector<std::pair<std::string, PatternType>> take_patterns_;
    std::vector<std::pair<std::string, PatternType>> ignore_patterns_;

    std::vector<int64_t> focus_stack_; // back = current focus

    double heading_deg_ = 0.0;
    struct Turn {
        double start_t = 0.0;
        double start_heading = 0.0;
        double target = 0.0;
        double done_t = 0.0;
        double direction = 1.0;
    };
    std::optional<Turn> turn_;

    std::optional<HeardObject> current_sound_;
    // entry x heard for category/template targets, entry x word utterance
    // for word targets (every new utterance is a fresh find opportunity)
    std::set<std::string> recognition_attempted_;
    std::set<std::string> emitted_interrupt_keys_;

    // alarm pipeline
    struct PendingAlarm {
        std::string key;
        HeardObject heard;
        double deadline = 0.0;
        double loudness = 0.0;
        bool novel = false;
        int64_t arrival_seq = 0;
        std::set<int64_t> seen_heard_ids;
        bool deferred_counted = false;
    };
    std::vector<PendingAlarm> consolidating_;
    std::vector<PendingAlarm> delivery_queue_;
    std::set<int64_t> consumed_alarm_heard_ids_;
    std::deque<double> alarm_delivery_times_;
    std::set<std::string> known_alarm_types_;
    int64_t alarm_arrival_seq_ = 0;

    AttentionMetrics metrics_;

    double half_life(ListKind kind) const;
    bool entry_matches(const TargetEntry& entry, const HeardObject& heard) const;
    static bool pattern_matches(const std::string& pattern, PatternType type,
                                const HeardObject& heard);
    bool interrupt_blocked(const HeardObject& heard) const;
    std::string alarm_key(const HeardObject& heard) const;
};

} // namespace earsim
