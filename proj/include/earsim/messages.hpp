#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace earsim {

enum class Novelty { known_type, new_type };

struct SpeechInfo {
    std::string speaker_id;
    std::string sex = "unspecified";
    std::vector<std::pair<std::string, double>> words; // matched word, time heard
    bool operator==(const SpeechInfo&) const = default;
};

// What the ear reports to cognition about one perceived sound.
struct HeardObject {
    int64_t id = 0; // unique to the ear, per run
    std::string category_id;
    double category_confidence = 0.0;
    double azimuth_deg = 0.0; // head-relative
    double azimuth_sigma_deg = 0.0;
    std::optional<double> distance_m;
    double onset_s = 0.0;
    double duration_s = 0.0; // running total while alive
    bool repetition = false;
    double loudness_db = 0.0; // above background
    double centroid_hz = 0.0;
    std::optional<SpeechInfo> speech;
    std::map<std::string, std::string> modifiers;
    int64_t stream_id = 0;
    Novelty novelty = Novelty::known_type;
    int consolidation_count = 1;
    std::optional<std::string> station_tag;
    std::string matched_template; // empty when unclassified

    bool operator==(const HeardObject&) const = default;
};

enum class Command {
    CURRENT_SOUND,
    SUBSCRIBE,
    UNSUBSCRIBE,
    LISTEN_PRIMARY,
    LISTEN_SECONDARY,
    TAKE_INTERRUPTS,
    IGNORE_INTERRUPTS,
    VIGILANCE,
    LIST_ADD,
    LIST_REMOVE,
    LIST_QUERY,
    TURN_HEAD,
    FOCUS,
    REFOCUS,
};

const char* to_string(Command cmd);
std::optional<Command> command_from_string(const std::string& s);

struct CommandMessage {
    int64_t seq = 0; // strictly increasing per connection
    Command cmd = Command::CURRENT_SOUND;
    nlohmann::json args = nlohmann::json::object();
};

struct AckMessage {
    int64_t seq = 0;
    std::string status = "ok"; // ok | error
    std::optional<std::string> error_code;
    nlohmann::json payload; // null unless the command returns data
    bool ok() const { return status == "ok"; }
};

enum class EventKind {
    SOUND,
    FOUND,
    INTERRUPT,
    ALARM,
    HEAD_DONE,
    HEAD_CANCELLED,
    STREAM_ENDED,
};

const char* to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(const std::string& s);

struct EventMessage {
    int64_t event_id = 0;
    EventKind kind = EventKind::SOUND;
    double t = 0.0;
    std::optional<HeardObject> heard;
    std::optional<std::string> matched_entry; // pattern that matched
    std::optional<std::string> list_kind;
};

nlohmann::json to_json(const HeardObject& h);
HeardObject heard_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CommandMessage& m);
nlohmann::json to_json(const AckMessage& m);
nlohmann::json to_json(const EventMessage& m);

CommandMessage command_from_json(const nlohmann::json& j);
AckMessage ack_from_json(const nlohmann::json& j);
EventMessage event_from_json(const nlohmann::json& j);

} // namespace earsim
