#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace earsim {

// Physical/physiological parameters of the simulated ear pair.
//
// The dynamic-range gates are fixed: anything quieter than 10 dB above
// background contributes nothing, anything louder than 130 dB above
// background saturates.
struct EarConfig {
    double head_radius_m = 0.0875;
    double speed_of_sound_mps = 343.0;

    // normal | aged | damaged | custom
    std::string sensitivity_preset = "normal";
    // Per-channel hearing loss in dB (>= 0). Built by finalize() for the
    // named presets; supplied directly for "custom".
    std::vector<double> sensitivity_shift_db;
    // Channel carrying the notch of the "damaged" preset; -1 = nearest 4 kHz.
    int damaged_notch_channel = -1;

    double front_emphasis_db = 3.0;
    double front_sector_deg = 60.0;

    int channels = 32;
    double fmin_hz = 100.0;
    double fmax_hz = 8000.0;
    std::vector<double> channel_centers_hz;

    static constexpr double min_gate_db = 10.0;
    static constexpr double max_gate_db = 130.0;

    // Fills channel_centers_hz (log-spaced fmin..fmax) and the preset
    // sensitivity curve. Throws EarError(invalid_argument) on bad values.
    void finalize();

    double channel_center(int ch) const { return channel_centers_hz.at(static_cast<size_t>(ch)); }
    bool in_front_sector(double relative_azimuth_deg) const;
};

struct LocalizationConfig {
    double sigma_front_deg = 2.0;
    double sigma_side_deg = 20.0;
    double front_deg = 30.0; // |az| <= front_deg -> sigma_front
    double side_deg = 90.0;  // |az| >= side_deg  -> sigma_side
};

struct SegregationConfig {
    int window_frames = 12;
    double cell_threshold_db = 3.0;   // above background to count as active
    double min_cluster_db = 6.0;      // fainter clusters stay in the null bucket
    int max_clusters = 5;
    double silhouette_min = 0.35;
    double gate_azimuth_deg = 25.0;
    double gate_cosine_distance = 0.4;
    double expiry_s = 1.0;
    double revive_window_s = 10.0;
    double intelligibility_margin_db = 6.0;
    int min_track_updates = 2;
    // Observation noise on cluster azimuth is sector_sigma scaled down by
    // this factor (window averaging); the reported sigma stays unscaled.
    double azimuth_noise_scale = 1.0 / 3.0;
};

struct AttentionConfig {
    int short_term_capacity = 32;
    double half_life_short_s = 300.0;
    double half_life_long_s = 3600.0;
    double recognition_theta = 0.3;
    double recognition_slope = 0.1;
    double base_latency_s = 0.2;
    double latency_gain_s = 0.8;
    double exogenous_threshold_db = 60.0; // above background
    double turn_rate_deg_per_s = 200.0;
    std::string agent_name; // loaded as a permanent word at startup
};

struct AlarmConfig {
    std::string own_station; // empty = accept all stations
    double station_threshold_db = 15.0;
    double consolidation_window_s = 2.0;
    int rate_cap_per_min = 30;
    int watermark_per_min = 15;
    std::vector<std::string> preprogrammed; // template/category ids known as alarms
};

struct SimConfig {
    EarConfig ear;
    LocalizationConfig localization;
    SegregationConfig segregation;
    AttentionConfig attention;
    AlarmConfig alarm;

    double match_threshold = 0.75;
    // Disables decay, localization noise and recognition randomness.
    bool super_ear = false;
    std::string ontology_path; // optional extra categories/templates

    static SimConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static SimConfig load_file(const std::string& path);
};

double wrap_deg(double deg); // -> [-180, 180)

} // namespace earsim
