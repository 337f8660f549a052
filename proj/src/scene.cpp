#include "earsim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "earsim/error.hpp"

namespace earsim {

const SoundSource* AuditoryScene::source(const std::string& id) const {
    for (const SoundSource& s : sources)
        if (s.id == id) return &s;
    return nullptr;
}

namespace {

nlohmann::json source_to_json(const SoundSource& s) {
    nlohmann::json j;
    j["id"] = s.id;
    j["template"] = s.template_id;
    j["onset_s"] = s.onset_s;
    j["duration_s"] = s.duration_s;
    j["level_db_at_1m"] = s.level_db_at_1m;
    j["repeat"] = s.repeat ? nlohmann::json{{"period_s", s.repeat->period_s}}
                           : nlohmann::json(nullptr);
    j["trajectory"] = nlohmann::json::array();
    for (const TrajectoryKeyframe& k : s.trajectory)
        j["trajectory"].push_back(
            {{"t_s", k.t_s}, {"azimuth_deg", k.azimuth_deg}, {"distance_m", k.distance_m}});
    if (s.speech) {
        nlohmann::json words = nlohmann::json::array();
        for (const WordToken& w : s.speech->words)
            words.push_back({{"w", w.w}, {"onset_s", w.onset_s}, {"dur_s", w.dur_s}});
        j["speech"] = {{"speaker_id", s.speech->speaker_id},
                       {"sex", s.speech->sex},
                       {"delivery", s.speech->delivery},
                       {"words", words}};
    }
    if (s.is_alarm) j["is_alarm"] = true;
    if (s.station) j["station"] = *s.station;
    return j;
}

SoundSource source_from_json(const nlohmann::json& j) {
    SoundSource s;
    s.id = j.at("id").get<std::string>();
    s.template_id = j.at("template").get<std::string>();
    s.onset_s = j.at("onset_s").get<double>();
    s.duration_s = j.at("duration_s").get<double>();
    s.level_db_at_1m = j.at("level_db_at_1m").get<double>();
    if (j.contains("repeat") && !j.at("repeat").is_null())
        s.repeat = Repeat{j.at("repeat").at("period_s").get<double>()};
    for (const auto& kj : j.at("trajectory")) {
        TrajectoryKeyframe k;
        k.t_s = kj.at("t_s").get<double>();
        k.azimuth_deg = kj.at("azimuth_deg").get<double>();
        k.distance_m = kj.at("distance_m").get<double>();
        s.trajectory.push_back(k);
    }
    if (j.contains("speech") && !j.at("speech").is_null()) {
        SpeechPayload sp;
        const auto& pj = j.at("speech");
        sp.speaker_id = pj.at("speaker_id").get<std::string>();
        sp.sex = pj.value("sex", "unspecified");
        sp.delivery = pj.value("delivery", "normal");
        if (pj.contains("words")) {
            for (const auto& wj : pj.at("words")) {
                WordToken w;
                w.w = wj.at("w").get<std::string>();
                w.onset_s = wj.at("onset_s").get<double>();
                w.dur_s = wj.at("dur_s").get<double>();
                sp.words.push_back(std::move(w));
            }
        }
        s.speech = std::move(sp);
    }
    s.is_alarm = j.value("is_alarm", false);
    if (j.contains("station") && !j.at("station").is_null())
        s.station = j.at("station").get<std::string>();
    return s;
}

} // namespace

nlohmann::json scene_to_json(const AuditoryScene& scene) {
    nlohmann::json j;
    j["duration_s"] = scene.duration_s;
    j["background_db"] = scene.background_db;
    j["sample_rate_hz"] = scene.sample_rate_hz;
    j["frame_hop_s"] = scene.frame_hop_s;
    j["sources"] = nlohmann::json::array();
    for (const SoundSource& s : scene.sources) j["sources"].push_back(source_to_json(s));
    return j;
}

std::string render_scene_text(const AuditoryScene& scene) {
    return scene_to_json(scene).dump(2) + "\n";
}

AuditoryScene parse_scene_json(const nlohmann::json& j) {
    AuditoryScene scene;
    std::string current_source = "<scene>";
    try {
        scene.duration_s = j.at("duration_s").get<double>();
        scene.background_db = j.at("background_db").get<double>();
        scene.sample_rate_hz = j.value("sample_rate_hz", 16000.0);
        scene.frame_hop_s = j.value("frame_hop_s", 0.02);
        if (j.contains("sources")) {
            for (const auto& sj : j.at("sources")) {
                current_source = sj.is_object() ? sj.value("id", "<unnamed>") : "<unnamed>";
                scene.sources.push_back(source_from_json(sj));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw EarError(ErrorCode::parse_error,
                       "scene document (source " + current_source + "): " + e.what());
    }
    std::vector<std::string> violations = validate_scene(scene, nullptr);
    if (!violations.empty())
        throw EarError(ErrorCode::parse_error, "scene semantic error: " + violations.front());
    return scene;
}

AuditoryScene parse_scene(const std::string& document) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw EarError(ErrorCode::parse_error,
                       "scene syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return parse_scene_json(j);
}

AuditoryScene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EarError(ErrorCode::io_error, "cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

namespace {

// Linear interpolation over keyframes, clamped at the ends.
void trajectory_at(const std::vector<TrajectoryKeyframe>& traj, double t, double& azimuth_deg,
                   double& distance_m, double& radial_velocity) {
    if (traj.empty()) {
        azimuth_deg = 0.0;
        distance_m = 1.0;
        radial_velocity = 0.0;
        return;
    }
    if (t <= traj.front().t_s || traj.size() == 1) {
        azimuth_deg = traj.front().azimuth_deg;
        distance_m = traj.front().distance_m;
        radial_velocity = 0.0;
        return;
    }
    if (t >= traj.back().t_s) {
        azimuth_deg = traj.back().azimuth_deg;
        distance_m = traj.back().distance_m;
        radial_velocity = 0.0;
        return;
    }
    for (size_t i = 0; i + 1 < traj.size(); ++i) {
        const TrajectoryKeyframe& a = traj[i];
        const TrajectoryKeyframe& b = traj[i + 1];
        if (t >= a.t_s && t <= b.t_s) {
            const double u = (t - a.t_s) / (b.t_s - a.t_s);
            azimuth_deg = wrap_deg(a.azimuth_deg + u * (b.azimuth_deg - a.azimuth_deg));
            distance_m = a.distance_m + u * (b.distance_m - a.distance_m);
            radial_velocity = (b.distance_m - a.distance_m) / (b.t_s - a.t_s);
            return;
        }
    }
    azimuth_deg = traj.back().azimuth_deg;
    distance_m = traj.back().distance_m;
    radial_velocity = 0.0;
}

} // namespace

SourceState source_state_at(const AuditoryScene& scene, const SoundSource& source, double t) {
    SourceState st;
    trajectory_at(source.trajectory, t, st.azimuth_deg, st.distance_m, st.radial_velocity_mps);
    st.level_at_ear_db = source.level_db_at_1m - 20.0 * std::log10(std::max(st.distance_m, 1e-9));

    st.active = false;
    if (t >= source.onset_s && t <= scene.duration_s) {
        if (source.repeat && source.repeat->period_s > 0.0) {
            const double phase = std::fmod(t - source.onset_s, source.repeat->period_s);
            st.active = phase < source.duration_s;
            st.local_t = phase;
        } else {
            st.active = t < source.onset_s + source.duration_s;
            st.local_t = t - source.onset_s;
        }
    }
    return st;
}

SourceState source_state_at(const AuditoryScene& scene, const std::string& source_id, double t) {
    const SoundSource* s = scene.source(source_id);
    if (!s) throw EarError(ErrorCode::not_found, "unknown source id: " + source_id);
    return source_state_at(scene, *s, t);
}

std::vector<std::string> validate_scene(const AuditoryScene& scene,
                                        const OntologyRegistry* registry) {
    std::vector<std::string> out;
    auto add = [&](const std::string& v) { out.push_back(v); };

    if (!(scene.duration_s > 0.0)) add("scene duration must be > 0");
    if (scene.sample_rate_hz < 8000.0) add("sample_rate_hz must be >= 8000");
    if (!(scene.frame_hop_s > 0.0)) add("frame_hop_s must be > 0");

    std::map<std::string, int> id_count;
    for (const SoundSource& s : scene.sources) id_count[s.id]++;
    for (const auto& [id, n] : id_count)
        if (n > 1) add("duplicate source id '" + id + "' (" + std::to_string(n) + " occurrences)");

    for (const SoundSource& s : scene.sources) {
        const std::string tag = "source '" + s.id + "': ";
        if (s.onset_s < 0.0) add(tag + "onset must be >= 0");
        if (!(s.duration_s > 0.0)) add(tag + "duration must be > 0");
        if (!s.repeat && s.onset_s + s.duration_s > scene.duration_s + 1e-9)
            add(tag + "onset + duration exceeds scene duration");
        if (s.repeat && !(s.repeat->period_s > 0.0)) add(tag + "repeat period must be > 0");

        for (size_t i = 0; i < s.trajectory.size(); ++i) {
            const TrajectoryKeyframe& k = s.trajectory[i];
            if (!(k.distance_m > 0.0)) add(tag + "keyframe distance must be > 0");
            if (k.azimuth_deg < -180.0 || k.azimuth_deg >= 180.0)
                add(tag + "keyframe azimuth out of [-180, 180)");
            if (i > 0 && !(k.t_s > s.trajectory[i - 1].t_s))
                add(tag + "keyframe times must be strictly increasing");
        }
        if (s.trajectory.empty()) add(tag + "trajectory must have at least one keyframe");

        if (s.speech) {
            if (s.speech->sex != "female" && s.speech->sex != "male" &&
                s.speech->sex != "unspecified")
                add(tag + "speech sex must be female/male/unspecified");
            if (s.speech->delivery != "normal" && s.speech->delivery != "whisper" &&
                s.speech->delivery != "shout")
                add(tag + "speech delivery must be normal/whisper/shout");
            double prev_end = -1.0;
            for (const WordToken& w : s.speech->words) {
                if (w.onset_s < 0.0 || !(w.dur_s > 0.0) ||
                    w.onset_s + w.dur_s > s.duration_s + 1e-9)
                    add(tag + "word '" + w.w + "' outside source duration");
                if (w.onset_s < prev_end - 1e-9)
                    add(tag + "word '" + w.w + "' overlaps the previous word");
                prev_end = std::max(prev_end, w.onset_s + w.dur_s);
            }
        }

        if (registry) {
            const SoundTemplate* t = registry->sound_template(s.template_id);
            if (!t) {
                add(tag + "unknown template id '" + s.template_id + "'");
            } else if (s.speech && !registry->is_speech_category(t->category)) {
                add(tag + "speech on non-speech category '" + t->category + "'");
            }
        }
    }
    return out;
}

} // namespace earsim
