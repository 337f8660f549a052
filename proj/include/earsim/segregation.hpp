#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "earsim/frontend.hpp"
#include "earsim/localization.hpp"
#include "earsim/messages.hpp"

namespace earsim {

// One active time-frequency cell of the analysis window.
struct Cell {
    int frame = 0;   // index within the window
    int channel = 0;
    double t = 0.0;
    double energy_db = 0.0;   // above background
    double azimuth_proxy_deg = 0.0; // from the channel ILD
    double onset_t = 0.0;     // first active time of this channel in the window
    std::string truth_source; // scene attribution, carried for simulation passthrough
};

struct ClusterObservation {
    double azimuth_rel_deg = 0.0; // energy-weighted, head-relative
    std::vector<double> signature; // normalized per-channel profile
    double loudness_db = 0.0;      // above background, latest frame
    double onset_t = 0.0;
    double centroid_hz = 0.0;
    std::string dominant_source; // scene attribution by contributed energy
    // observed temporal behaviour; the engine fills it in from the scene
    Envelope envelope = Envelope::sustained;
    int cell_count = 0;
};

struct SegregationResult {
    std::vector<Cell> cells;
    // cluster index per cell; -1 marks cells whose cluster fell below the
    // reporting floor (treated as background)
    std::vector<int> assignments;
    std::vector<ClusterObservation> clusters;
};

// Clusters the active cells of a window on (azimuth proxy, band, onset).
// Cells at background level are excluded (the null cluster).
SegregationResult segregate_window(std::span<const FrameObservation> window,
                                   const EarConfig& ear, const SegregationConfig& config,
                                   double background_db, std::mt19937_64& rng);

struct StreamTrack {
    int64_t stream_id = 0; // never reused within a run
    int64_t heard_id = 0;  // the HeardObject id this track reports under
    double birth = 0.0;
    double last_update = 0.0;
    std::vector<LocalizationEstimate> azimuth_track;
    double world_azimuth_deg = 0.0; // smoothed, heading-compensated
    std::vector<double> signature_estimate;
    double loudness_db = 0.0;
    double doppler_ratio = 1.0;
    Classification category;
    std::vector<std::pair<std::string, double>> speech_matches;
    bool repetition_seen = false;
    bool is_alarm_like = false;
    std::optional<std::string> station_tag;
    std::string dominant_source;
    double birth_centroid_hz = 0.0;
    double centroid_hz = 0.0;
    int updates = 0;
    bool alive = true;
    double closed_at = 0.0;
};

class StreamTracker {
public:
    StreamTracker(const EarConfig& ear, const LocalizationConfig& loc,
                  const SegregationConfig& seg, bool super_ear)
        : ear_(ear), loc_(loc), seg_(seg), super_ear_(super_ear) {}

    // Matches cluster observations against live tracks (gated on azimuth and
    // signature), births tracks for the rest, expires silent ones. Returns
    // stream ids of tracks closed this step.
    std::vector<int64_t> update(const std::vector<ClusterObservation>& clusters, double t,
                                double head_heading_deg, const OntologyRegistry& registry,
                                std::mt19937_64& rng);

    const std::vector<StreamTrack>& tracks() const { return tracks_; }
    std::vector<StreamTrack>& mutable_tracks() { return tracks_; }
    std::vector<const StreamTrack*> live_tracks() const;
    const StreamTrack* track(int64_t stream_id) const;
    bool is_live(int64_t stream_id) const;
    void set_next_heard_id(int64_t* counter) { heard_id_counter_ = counter; }

private:
    EarConfig ear_;
    LocalizationConfig loc_;
    SegregationConfig seg_;
    bool super_ear_;
    std::vector<StreamTrack> tracks_;
    int64_t next_stream_id_ = 1;
    int64_t fallback_heard_counter_ = 1;
    int64_t* heard_id_counter_ = nullptr;

    int64_t fresh_heard_id();
    void apply_observation(StreamTrack& track, const ClusterObservation& obs, double t,
                           double head_heading_deg, const OntologyRegistry& registry,
                           std::mt19937_64& rng);
};

// Observed/emitted frequency ratio; from the matched template's centroid
// when the category is known, else from drift relative to the track birth.
double estimate_doppler(const StreamTrack& track, const OntologyRegistry& registry,
                        const EarConfig& ear);

// Ground-truth word feed for one track (simulation passthrough).
struct ActiveSpeech {
    std::string speaker_id;
    std::string sex = "unspecified";
    std::vector<std::pair<std::string, double>> words; // word, absolute time
    bool present = false;
};

// Builds the HeardObject candidate for a live track. Word matches require the
// word to be loaded (or permanent) and the stream to be intelligible; an
// unintelligible stream matches only permanent words.
HeardObject identify_stream(const StreamTrack& track, const OntologyRegistry& registry,
                            const EarConfig& ear, const ActiveSpeech& speech,
                            const std::vector<std::string>& loaded_words,
                            const std::vector<std::string>& permanent_words, bool intelligible,
                            double now, double match_threshold,
                            std::optional<double> distance_hint);

} // namespace earsim
