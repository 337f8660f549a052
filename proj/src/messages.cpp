#include "earsim/messages.hpp"

#include "earsim/error.hpp"

namespace earsim {

const char* to_string(Command cmd) {
    switch (cmd) {
        case Command::CURRENT_SOUND: return "CURRENT_SOUND";
        case Command::SUBSCRIBE: return "SUBSCRIBE";
        case Command::UNSUBSCRIBE: return "UNSUBSCRIBE";
        case Command::LISTEN_PRIMARY: return "LISTEN_PRIMARY";
        case Command::LISTEN_SECONDARY: return "LISTEN_SECONDARY";
        case Command::TAKE_INTERRUPTS: return "TAKE_INTERRUPTS";
        case Command::IGNORE_INTERRUPTS: return "IGNORE_INTERRUPTS";
        case Command::VIGILANCE: return "VIGILANCE";
        case Command::LIST_ADD: return "LIST_ADD";
        case Command::LIST_REMOVE: return "LIST_REMOVE";
        case Command::LIST_QUERY: return "LIST_QUERY";
        case Command::TURN_HEAD: return "TURN_HEAD";
        case Command::FOCUS: return "FOCUS";
        case Command::REFOCUS: return "REFOCUS";
    }
    return "CURRENT_SOUND";
}

std::optional<Command> command_from_string(const std::string& s) {
    static const std::map<std::string, Command> table = {
        {"CURRENT_SOUND", Command::CURRENT_SOUND},
        {"SUBSCRIBE", Command::SUBSCRIBE},
        {"UNSUBSCRIBE", Command::UNSUBSCRIBE},
        {"LISTEN_PRIMARY", Command::LISTEN_PRIMARY},
        {"LISTEN_SECONDARY", Command::LISTEN_SECONDARY},
        {"TAKE_INTERRUPTS", Command::TAKE_INTERRUPTS},
        {"IGNORE_INTERRUPTS", Command::IGNORE_INTERRUPTS},
        {"VIGILANCE", Command::VIGILANCE},
        {"LIST_ADD", Command::LIST_ADD},
        {"LIST_REMOVE", Command::LIST_REMOVE},
        {"LIST_QUERY", Command::LIST_QUERY},
        {"TURN_HEAD", Command::TURN_HEAD},
        {"FOCUS", Command::FOCUS},
        {"REFOCUS", Command::REFOCUS},
    };
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::SOUND: return "SOUND";
        case EventKind::FOUND: return "FOUND";
        case EventKind::INTERRUPT: return "INTERRUPT";
        case EventKind::ALARM: return "ALARM";
        case EventKind::HEAD_DONE: return "HEAD_DONE";
        case EventKind::HEAD_CANCELLED: return "HEAD_CANCELLED";
        case EventKind::STREAM_ENDED: return "STREAM_ENDED";
    }
    return "SOUND";
}

std::optional<EventKind> event_kind_from_string(const std::string& s) {
    static const std::map<std::string, EventKind> table = {
        {"SOUND", EventKind::SOUND},
        {"FOUND", EventKind::FOUND},
        {"INTERRUPT", EventKind::INTERRUPT},
        {"ALARM", EventKind::ALARM},
        {"HEAD_DONE", EventKind::HEAD_DONE},
        {"HEAD_CANCELLED", EventKind::HEAD_CANCELLED},
        {"STREAM_ENDED", EventKind::STREAM_ENDED},
    };
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

nlohmann::json to_json(const HeardObject& h) {
    nlohmann::json j;
    j["id"] = h.id;
    j["category"] = {{"id", h.category_id}, {"confidence", h.category_confidence}};
    j["azimuth"] = h.azimuth_deg;
    j["azimuth_sigma"] = h.azimuth_sigma_deg;
    j["distance"] = h.distance_m ? nlohmann::json(*h.distance_m) : nlohmann::json(nullptr);
    j["onset"] = h.onset_s;
    j["duration"] = h.duration_s;
    j["repetition"] = h.repetition;
    j["loudness"] = h.loudness_db;
    j["centroid"] = h.centroid_hz;
    if (h.speech) {
        nlohmann::json words = nlohmann::json::array();
        for (const auto& [w, t] : h.speech->words) words.push_back({{"w", w}, {"t", t}});
        j["speech"] = {{"speaker_id", h.speech->speaker_id},
                       {"sex", h.speech->sex},
                       {"words", words}};
    } else {
        j["speech"] = nullptr;
    }
    j["modifiers"] = h.modifiers;
    j["stream_id"] = h.stream_id;
    j["novelty"] = h.novelty == Novelty::new_type ? "new_type" : "known_type";
    j["consolidation_count"] = h.consolidation_count;
    j["station_tag"] = h.station_tag ? nlohmann::json(*h.station_tag) : nlohmann::json(nullptr);
    if (!h.matched_template.empty()) j["matched_template"] = h.matched_template;
    return j;
}

HeardObject heard_from_json(const nlohmann::json& j) {
    HeardObject h;
    h.id = j.at("id").get<int64_t>();
    h.category_id = j.at("category").at("id").get<std::string>();
    h.category_confidence = j.at("category").at("confidence").get<double>();
    h.azimuth_deg = j.at("azimuth").get<double>();
    h.azimuth_sigma_deg = j.at("azimuth_sigma").get<double>();
    if (j.contains("distance") && !j.at("distance").is_null())
        h.distance_m = j.at("distance").get<double>();
    h.onset_s = j.at("onset").get<double>();
    h.duration_s = j.at("duration").get<double>();
    h.repetition = j.at("repetition").get<bool>();
    h.loudness_db = j.at("loudness").get<double>();
    h.centroid_hz = j.value("centroid", 0.0);
    if (j.contains("speech") && !j.at("speech").is_null()) {
        SpeechInfo sp;
        sp.speaker_id = j.at("speech").at("speaker_id").get<std::string>();
        sp.sex = j.at("speech").value("sex", "unspecified");
        for (const auto& wj : j.at("speech").at("words"))
            sp.words.emplace_back(wj.at("w").get<std::string>(), wj.at("t").get<double>());
        h.speech = std::move(sp);
    }
    if (j.contains("modifiers"))
        h.modifiers = j.at("modifiers").get<std::map<std::string, std::string>>();
    h.stream_id = j.at("stream_id").get<int64_t>();
    h.novelty = j.value("novelty", "known_type") == std::string("new_type") ? Novelty::new_type
                                                                            : Novelty::known_type;
    h.consolidation_count = j.value("consolidation_count", 1);
    if (j.contains("station_tag") && !j.at("station_tag").is_null())
        h.station_tag = j.at("station_tag").get<std::string>();
    h.matched_template = j.value("matched_template", "");
    return h;
}

nlohmann::json to_json(const CommandMessage& m) {
    return {{"seq", m.seq}, {"cmd", to_string(m.cmd)}, {"args", m.args}};
}

nlohmann::json to_json(const AckMessage& m) {
    nlohmann::json j;
    j["seq"] = m.seq;
    j["status"] = m.status;
    if (m.error_code) j["error_code"] = *m.error_code;
    if (!m.payload.is_null()) j["payload"] = m.payload;
    return j;
}

nlohmann::json to_json(const EventMessage& m) {
    nlohmann::json j;
    j["event_id"] = m.event_id;
    j["kind"] = to_string(m.kind);
    j["t"] = m.t;
    if (m.heard) j["heard"] = to_json(*m.heard);
    if (m.matched_entry) j["matched_entry"] = *m.matched_entry;
    if (m.list_kind) j["list_kind"] = *m.list_kind;
    return j;
}

CommandMessage command_from_json(const nlohmann::json& j) {
    CommandMessage m;
    if (!j.contains("seq") || !j.at("seq").is_number_integer())
        throw EarError(ErrorCode::bad_request, "command requires integer 'seq'");
    m.seq = j.at("seq").get<int64_t>();
    if (!j.contains("cmd") || !j.at("cmd").is_string())
        throw EarError(ErrorCode::bad_request, "command requires string 'cmd'");
    const std::string cmd = j.at("cmd").get<std::string>();
    auto parsed = command_from_string(cmd);
    if (!parsed) throw EarError(ErrorCode::bad_request, "unknown cmd '" + cmd + "'");
    m.cmd = *parsed;
    if (j.contains("args")) {
        if (!j.at("args").is_object())
            throw EarError(ErrorCode::bad_request, "'args' must be an object");
        m.args = j.at("args");
    }
    return m;
}

AckMessage ack_from_json(const nlohmann::json& j) {
    AckMessage m;
    m.seq = j.at("seq").get<int64_t>();
    m.status = j.at("status").get<std::string>();
    if (j.contains("error_code")) m.error_code = j.at("error_code").get<std::string>();
    if (j.contains("payload")) m.payload = j.at("payload");
    return m;
}

EventMessage event_from_json(const nlohmann::json& j) {
    EventMessage m;
    m.event_id = j.at("event_id").get<int64_t>();
    auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw EarError(ErrorCode::bad_request, "unknown event kind");
    m.kind = *kind;
    m.t = j.at("t").get<double>();
    if (j.contains("heard") && !j.at("heard").is_null())
        m.heard = heard_from_json(j.at("heard"));
    if (j.contains("matched_entry")) m.matched_entry = j.at("matched_entry").get<std::string>();
    if (j.contains("list_kind")) m.list_kind = j.at("list_kind").get<std::string>();
    return m;
}

} // namespace earsim
