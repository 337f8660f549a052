#pragma once

#include <span>
#include <string>
#include <vector>

#include "earsim/config.hpp"
#include "earsim/scene.hpp"

namespace earsim {

struct CochleagramFrame {
    double t = 0.0;
    std::vector<double> left_db;
    std::vector<double> right_db;
    bool operator==(const CochleagramFrame&) const = default;
};

struct InterauralFeatures {
    double t = 0.0;
    double itd_s = 0.0;                 // positive = right ear leads
    std::vector<double> ild_db;         // right - left, per channel
    double summed_loudness_db = 0.0;    // dB above background
};

// One rendered time step: the frame after sensitivity shaping, the
// interaural features derived from it, and the scene-truth attribution of
// each channel (dominant source id, "" where only background).
struct FrameObservation {
    CochleagramFrame frame;
    InterauralFeatures features;
    std::vector<std::string> dominant_source;
};

// Woodworth spherical-head ITD, folded front/rear, sign follows side.
double itd_model(double relative_azimuth_deg, const EarConfig& config);
double max_itd(const EarConfig& config); // (r/c)(pi/2 + 1)

// Head-shadow level difference k(f) * sin(azimuth); k grows with frequency.
double ild_model(double relative_azimuth_deg, double channel_center_hz, const EarConfig& config);
double ild_scale_db(double channel_center_hz, const EarConfig& config); // k(f)

// Resamples a signature across log-spaced channels by the given
// observed/emitted frequency ratio; result renormalized to sum 1.
std::vector<double> doppler_shift_signature(std::span<const double> signature, double ratio,
                                            const EarConfig& config);

CochleagramFrame render_frame(const AuditoryScene& scene, const OntologyRegistry& registry,
                              const EarConfig& config, double head_heading_deg, double t);

InterauralFeatures interaural_features(const AuditoryScene& scene, const OntologyRegistry& registry,
                                       const EarConfig& config, double head_heading_deg, double t);

// Per-channel hearing loss applied to both ears, floored at background.
CochleagramFrame apply_sensitivity(CochleagramFrame frame, const EarConfig& config,
                                   double background_db);

FrameObservation render_observation(const AuditoryScene& scene, const OntologyRegistry& registry,
                                    const EarConfig& config, double head_heading_deg, double t,
                                    bool with_sensitivity = true);

double spectral_centroid_hz(std::span<const double> weights, const EarConfig& config);

} // namespace earsim
