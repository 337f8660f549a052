#pragma once

#include <optional>
#include <random>
#include <span>

#include "earsim/frontend.hpp"

namespace earsim {

enum class DistanceConfidence { coarse, unknown };

struct LocalizationEstimate {
    double azimuth_deg = 0.0;       // [-180, 180)
    double azimuth_sigma_deg = 1.0; // > 0
    std::optional<double> distance_m;
    DistanceConfidence distance_confidence = DistanceConfidence::unknown;
    bool front_back_resolved = false;
};

// 2 deg in the front sector, rising linearly to 20 deg at/behind the side.
double sector_sigma(double azimuth_deg, const LocalizationConfig& config);

// Numeric inverse of the Woodworth model; returns the front-hemisphere
// azimuth in [-90, 90] whose ITD matches. Out-of-bound ITDs clamp to +-90.
double invert_itd(double itd_s, const EarConfig& config);

// Front/back stays unresolved (front assumed); Gaussian error with
// sigma = sector_sigma(folded azimuth) unless super_ear.
LocalizationEstimate localize(const InterauralFeatures& features, const EarConfig& ear,
                              const LocalizationConfig& config, bool super_ear,
                              std::mt19937_64& rng);

struct HeadingObservation {
    double heading_deg = 0.0;
    double estimate_deg = 0.0; // head-relative, front-folded
};

struct FrontBackResolution {
    double world_azimuth_deg = 0.0;
    bool rear = false;
};

// A head turn of delta shifts a front source's apparent azimuth by -delta
// and a rear source's by +delta; picks the consistent hypothesis.
// nullopt when the observations span too little head motion.
std::optional<FrontBackResolution> resolve_front_back(std::span<const HeadingObservation> history,
                                                      double min_turn_deg = 5.0);

// Inverse square law when the template's reference level is known.
std::pair<std::optional<double>, DistanceConfidence> distance_estimate(
    double observed_level_db, std::optional<double> nominal_level_db);

} // namespace earsim
