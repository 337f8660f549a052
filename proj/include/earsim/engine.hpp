#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <set>

#include "earsim/attention.hpp"
#include "earsim/scene.hpp"
#include "earsim/segregation.hpp"

namespace earsim {

// One ear instance: virtual clock, perception pipeline, attention state and
// the command surface. Commands funnel through a serialized inbox; events
// leave through a single ordered sink.
class Engine {
public:
    Engine(AuditoryScene scene, OntologyRegistry registry, SimConfig config, uint64_t seed);

    using EventSink = std::function<void(const EventMessage&)>;
    void set_event_sink(EventSink sink) { event_sink_ = std::move(sink); }
    void set_frame_dump(std::function<void(const FrameObservation&)> f) { frame_dump_ = std::move(f); }

    // Serialized path: the caller owns the timeline (harness, tests).
    // `at` is the virtual arrival time; it is clamped into the current step.
    AckMessage handle_command(int client, const CommandMessage& cmd, double at);
    // Thread-safe path used by the socket server; processed at the next step.
    void submit(int client, CommandMessage cmd);

    void step();    // advance one frame hop
    void run_all(); // step to the end of the scene
    // Emits whatever is still queued (recognition latencies, head slews that
    // finish past the scene end) in timestamp order.
    void drain_events();
    bool finished() const;
    double now() const { return now_; }
    double frame_hop() const { return scene_.frame_hop_s; }

    const AuditoryScene& scene() const { return scene_; }
    const OntologyRegistry& registry() const { return registry_; }
    const SimConfig& config() const { return config_; }
    const AttentionState& attention() const { return attention_; }
    const StreamTracker& tracker() const { return tracker_; }
    const AttentionMetrics& metrics() const { return attention_.metrics(); }
    const std::vector<EventMessage>& event_log() const { return event_log_; }

    std::optional<HeardObject> current_sound() const { return attention_.current_sound(); }
    double head_heading() const { return attention_.head_heading(now_); }
    bool client_subscribed(int client) const { return subscribed_.count(client) > 0; }
    void drop_client(int client); // disconnect cleanup

private:
    AuditoryScene scene_;
    OntologyRegistry registry_;
    SimConfig config_;
    std::mt19937_64 rng_;

    AttentionState attention_;
    StreamTracker tracker_;
    int64_t heard_id_counter_ = 1;

    double now_;
    std::deque<FrameObservation> window_;

    struct QueuedEvent {
        double t;
        int64_t seq;
        PendingEvent ev;
        bool operator>(const QueuedEvent& o) const {
            if (t != o.t) return t > o.t;
            return seq > o.seq;
        }
    };
    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<QueuedEvent>> queue_;
    int64_t queue_seq_ = 0;
    int64_t next_event_id_ = 1;
    std::vector<EventMessage> event_log_;
    EventSink event_sink_;
    std::function<void(const FrameObservation&)> frame_dump_;

    std::mutex inbox_mutex_;
    std::vector<std::pair<int, CommandMessage>> inbox_;

    std::map<int, int64_t> last_seq_;
    std::set<int> subscribed_;

    std::map<int64_t, HeardObject> last_candidate_by_stream_;
    std::set<std::string> presented_words_; // stream:word:occurrence keys
    std::map<int64_t, std::vector<HeadingObservation>> heading_history_;
    double last_heading_ = 0.0;

    void schedule(PendingEvent ev);
    void flush_queue_until(double t);
    void emit(const PendingEvent& ev);
    void pipeline(double t);
    AckMessage dispatch(int client, const CommandMessage& cmd, double at);

    struct PatternInfo {
        PatternType type;
        bool valid;
    };
    PatternInfo resolve_pattern(const std::string& pattern) const;
    std::vector<Candidate> build_candidates(double t, double heading);
};

} // namespace earsim
