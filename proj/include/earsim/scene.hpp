#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "earsim/ontology.hpp"

namespace earsim {

struct TrajectoryKeyframe {
    double t_s = 0.0;
    double azimuth_deg = 0.0; // [-180, 180)
    double distance_m = 1.0;  // > 0
    bool operator==(const TrajectoryKeyframe&) const = default;
};

struct WordToken {
    std::string w;
    double onset_s = 0.0; // relative to source onset
    double dur_s = 0.0;
    bool operator==(const WordToken&) const = default;
};

struct SpeechPayload {
    std::string speaker_id;
    std::string sex = "unspecified";   // female | male | unspecified
    std::string delivery = "normal";    // normal | whisper | shout
    std::vector<WordToken> words;
    bool operator==(const SpeechPayload&) const = default;
};

struct Repeat {
    double period_s = 0.0;
    bool operator==(const Repeat&) const = default;
};

struct SoundSource {
    std::string id;
    std::string template_id;
    double onset_s = 0.0;
    double duration_s = 1.0;
    double level_db_at_1m = 70.0;
    std::optional<Repeat> repeat;
    std::vector<TrajectoryKeyframe> trajectory;
    std::optional<SpeechPayload> speech;
    bool is_alarm = false;
    std::optional<std::string> station;
    bool operator==(const SoundSource&) const = default;
};

struct AuditoryScene {
    double duration_s = 1.0;
    double background_db = 30.0;
    double sample_rate_hz = 16000.0;
    double frame_hop_s = 0.02;
    std::vector<SoundSource> sources;
    bool operator==(const AuditoryScene&) const = default;

    const SoundSource* source(const std::string& id) const;
};

struct SourceState {
    bool active = false;
    double azimuth_deg = 0.0;
    double distance_m = 1.0;
    double level_at_ear_db = 0.0;
    double radial_velocity_mps = 0.0; // d(distance)/dt; positive = receding
    double local_t = 0.0;             // time since the (current) onset
};

// Throws EarError(parse_error) with position info on syntax errors and
// on semantic errors naming the offending source id.
AuditoryScene parse_scene(const std::string& document);
AuditoryScene parse_scene_json(const nlohmann::json& j);

nlohmann::json scene_to_json(const AuditoryScene& scene);
std::string render_scene_text(const AuditoryScene& scene);

AuditoryScene load_scene_file(const std::string& path);

SourceState source_state_at(const AuditoryScene& scene, const SoundSource& source, double t);
// Throws EarError(not_found) for an unknown source id.
SourceState source_state_at(const AuditoryScene& scene, const std::string& source_id, double t);

// Empty iff every invariant holds. Violations are data, not errors.
// Template checks run only when a registry is supplied.
std::vector<std::string> validate_scene(const AuditoryScene& scene,
                                        const OntologyRegistry* registry = nullptr);

} // namespace earsim
