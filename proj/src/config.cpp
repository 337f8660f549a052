#include "earsim/config.hpp"

#include <cmath>
#include <fstream>

#include "earsim/error.hpp"

namespace earsim {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::bad_request: return "bad_request";
        case ErrorCode::bad_seq: return "bad_seq";
        case ErrorCode::capacity_full: return "capacity_full";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::dead_stream: return "dead_stream";
        case ErrorCode::unknown_category: return "unknown_category";
        case ErrorCode::malformed_signature: return "malformed_signature";
        case ErrorCode::unknown_pattern: return "unknown_pattern";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

double wrap_deg(double deg) {
    double w = deg - 360.0 * std::floor((deg + 180.0) / 360.0);
    if (w >= 180.0) w -= 360.0; // guards the floor rounding edge
    return w;
}

void EarConfig::finalize() {
    if (channels < 8)
        throw EarError(ErrorCode::invalid_argument, "EarConfig: channels must be >= 8");
    if (!(fmin_hz > 0.0) || !(fmax_hz > fmin_hz))
        throw EarError(ErrorCode::invalid_argument, "EarConfig: bad channel frequency range");
    if (!(head_radius_m > 0.0) || !(speed_of_sound_mps > 0.0))
        throw EarError(ErrorCode::invalid_argument, "EarConfig: bad head geometry");

    channel_centers_hz.resize(static_cast<size_t>(channels));
    const double ratio = fmax_hz / fmin_hz;
    for (int i = 0; i < channels; ++i) {
        const double frac = channels == 1 ? 0.0 : static_cast<double>(i) / (channels - 1);
        channel_centers_hz[static_cast<size_t>(i)] = fmin_hz * std::pow(ratio, frac);
    }

    if (sensitivity_preset == "custom") {
        if (static_cast<int>(sensitivity_shift_db.size()) != channels)
            throw EarError(ErrorCode::invalid_argument,
                           "EarConfig: custom sensitivity curve length mismatch");
        return;
    }

    sensitivity_shift_db.assign(static_cast<size_t>(channels), 0.0);
    if (sensitivity_preset == "normal") {
        // flat
    } else if (sensitivity_preset == "aged") {
        // presbycusis-like: flat below 1 kHz, sloping to 30 dB loss at 8 kHz
        for (int i = 0; i < channels; ++i) {
            const double f = channel_centers_hz[static_cast<size_t>(i)];
            if (f > 1000.0)
                sensitivity_shift_db[static_cast<size_t>(i)] =
                    30.0 * std::log(f / 1000.0) / std::log(8.0);
        }
    } else if (sensitivity_preset == "damaged") {
        int notch = damaged_notch_channel;
        if (notch < 0) {
            double best = 1e300;
            for (int i = 0; i < channels; ++i) {
                const double d = std::abs(channel_centers_hz[static_cast<size_t>(i)] - 4000.0);
                if (d < best) { best = d; notch = i; }
            }
        }
        if (notch >= channels)
            throw EarError(ErrorCode::invalid_argument, "EarConfig: notch channel out of range");
        sensitivity_shift_db[static_cast<size_t>(notch)] = 40.0;
    } else {
        throw EarError(ErrorCode::invalid_argument,
                       "EarConfig: unknown sensitivity preset '" + sensitivity_preset + "'");
    }
}

bool EarConfig::in_front_sector(double relative_azimuth_deg) const {
    return std::abs(wrap_deg(relative_azimuth_deg)) <= front_sector_deg;
}

namespace {

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

SimConfig SimConfig::from_json(const nlohmann::json& j) {
    SimConfig c;
    if (j.contains("ear")) {
        const auto& e = j.at("ear");
        get_if(e, "head_radius_m", c.ear.head_radius_m);
        get_if(e, "speed_of_sound_mps", c.ear.speed_of_sound_mps);
        get_if(e, "sensitivity_preset", c.ear.sensitivity_preset);
        get_if(e, "sensitivity_shift_db", c.ear.sensitivity_shift_db);
        get_if(e, "damaged_notch_channel", c.ear.damaged_notch_channel);
        get_if(e, "front_emphasis_db", c.ear.front_emphasis_db);
        get_if(e, "front_sector_deg", c.ear.front_sector_deg);
        get_if(e, "channels", c.ear.channels);
        get_if(e, "fmin_hz", c.ear.fmin_hz);
        get_if(e, "fmax_hz", c.ear.fmax_hz);
    }
    if (j.contains("localization")) {
        const auto& l = j.at("localization");
        get_if(l, "sigma_front_deg", c.localization.sigma_front_deg);
        get_if(l, "sigma_side_deg", c.localization.sigma_side_deg);
        get_if(l, "front_deg", c.localization.front_deg);
        get_if(l, "side_deg", c.localization.side_deg);
    }
    if (j.contains("segregation")) {
        const auto& s = j.at("segregation");
        get_if(s, "window_frames", c.segregation.window_frames);
        get_if(s, "cell_threshold_db", c.segregation.cell_threshold_db);
        get_if(s, "max_clusters", c.segregation.max_clusters);
        get_if(s, "silhouette_min", c.segregation.silhouette_min);
        get_if(s, "gate_azimuth_deg", c.segregation.gate_azimuth_deg);
        get_if(s, "gate_cosine_distance", c.segregation.gate_cosine_distance);
        get_if(s, "expiry_s", c.segregation.expiry_s);
        get_if(s, "revive_window_s", c.segregation.revive_window_s);
        get_if(s, "intelligibility_margin_db", c.segregation.intelligibility_margin_db);
        get_if(s, "min_track_updates", c.segregation.min_track_updates);
        get_if(s, "azimuth_noise_scale", c.segregation.azimuth_noise_scale);
    }
    if (j.contains("attention")) {
        const auto& a = j.at("attention");
        get_if(a, "short_term_capacity", c.attention.short_term_capacity);
        get_if(a, "half_life_short_s", c.attention.half_life_short_s);
        get_if(a, "half_life_long_s", c.attention.half_life_long_s);
        get_if(a, "recognition_theta", c.attention.recognition_theta);
        get_if(a, "recognition_slope", c.attention.recognition_slope);
        get_if(a, "base_latency_s", c.attention.base_latency_s);
        get_if(a, "latency_gain_s", c.attention.latency_gain_s);
        get_if(a, "exogenous_threshold_db", c.attention.exogenous_threshold_db);
        get_if(a, "turn_rate_deg_per_s", c.attention.turn_rate_deg_per_s);
        get_if(a, "agent_name", c.attention.agent_name);
    }
    if (j.contains("alarm")) {
        const auto& a = j.at("alarm");
        get_if(a, "own_station", c.alarm.own_station);
        get_if(a, "station_threshold_db", c.alarm.station_threshold_db);
        get_if(a, "consolidation_window_s", c.alarm.consolidation_window_s);
        get_if(a, "rate_cap_per_min", c.alarm.rate_cap_per_min);
        get_if(a, "watermark_per_min", c.alarm.watermark_per_min);
        get_if(a, "preprogrammed", c.alarm.preprogrammed);
    }
    get_if(j, "match_threshold", c.match_threshold);
    get_if(j, "super_ear", c.super_ear);
    get_if(j, "ontology_path", c.ontology_path);
    c.ear.finalize();
    return c;
}

nlohmann::json SimConfig::to_json() const {
    nlohmann::json j;
    j["ear"] = {
        {"head_radius_m", ear.head_radius_m},
        {"speed_of_sound_mps", ear.speed_of_sound_mps},
        {"sensitivity_preset", ear.sensitivity_preset},
        {"damaged_notch_channel", ear.damaged_notch_channel},
        {"front_emphasis_db", ear.front_emphasis_db},
        {"front_sector_deg", ear.front_sector_deg},
        {"channels", ear.channels},
        {"fmin_hz", ear.fmin_hz},
        {"fmax_hz", ear.fmax_hz},
    };
    if (ear.sensitivity_preset == "custom")
        j["ear"]["sensitivity_shift_db"] = ear.sensitivity_shift_db;
    j["localization"] = {
        {"sigma_front_deg", localization.sigma_front_deg},
        {"sigma_side_deg", localization.sigma_side_deg},
        {"front_deg", localization.front_deg},
        {"side_deg", localization.side_deg},
    };
    j["segregation"] = {
        {"window_frames", segregation.window_frames},
        {"cell_threshold_db", segregation.cell_threshold_db},
        {"max_clusters", segregation.max_clusters},
        {"silhouette_min", segregation.silhouette_min},
        {"gate_azimuth_deg", segregation.gate_azimuth_deg},
        {"gate_cosine_distance", segregation.gate_cosine_distance},
        {"expiry_s", segregation.expiry_s},
        {"revive_window_s", segregation.revive_window_s},
        {"intelligibility_margin_db", segregation.intelligibility_margin_db},
        {"min_track_updates", segregation.min_track_updates},
        {"azimuth_noise_scale", segregation.azimuth_noise_scale},
    };
    j["attention"] = {
        {"short_term_capacity", attention.short_term_capacity},
        {"half_life_short_s", attention.half_life_short_s},
        {"half_life_long_s", attention.half_life_long_s},
        {"recognition_theta", attention.recognition_theta},
        {"recognition_slope", attention.recognition_slope},
        {"base_latency_s", attention.base_latency_s},
        {"latency_gain_s", attention.latency_gain_s},
        {"exogenous_threshold_db", attention.exogenous_threshold_db},
        {"turn_rate_deg_per_s", attention.turn_rate_deg_per_s},
        {"agent_name", attention.agent_name},
    };
    j["alarm"] = {
        {"own_station", alarm.own_station},
        {"station_threshold_db", alarm.station_threshold_db},
        {"consolidation_window_s", alarm.consolidation_window_s},
        {"rate_cap_per_min", alarm.rate_cap_per_min},
        {"watermark_per_min", alarm.watermark_per_min},
        {"preprogrammed", alarm.preprogrammed},
    };
    j["match_threshold"] = match_threshold;
    j["super_ear"] = super_ear;
    if (!ontology_path.empty()) j["ontology_path"] = ontology_path;
    return j;
}

SimConfig SimConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw EarError(ErrorCode::io_error, "cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw EarError(ErrorCode::parse_error, "config parse error: " + std::string(e.what()));
    }
    return from_json(j);
}

} // namespace earsim
