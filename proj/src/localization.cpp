#include "earsim/localization.hpp"

#include <algorithm>
#include <cmath>

namespace earsim {

double sector_sigma(double azimuth_deg, const LocalizationConfig& config) {
    const double a = std::abs(wrap_deg(azimuth_deg));
    if (a <= config.front_deg) return config.sigma_front_deg;
    if (a >= config.side_deg) return config.sigma_side_deg;
    const double u = (a - config.front_deg) / (config.side_deg - config.front_deg);
    return config.sigma_front_deg + u * (config.sigma_side_deg - config.sigma_front_deg);
}

double invert_itd(double itd_s, const EarConfig& config) {
    const double bound = max_itd(config);
    const double mag = std::abs(itd_s);
    if (mag >= bound) return itd_s < 0.0 ? -90.0 : 90.0;
    double lo = 0.0, hi = 90.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::abs(itd_model(mid, config)) < mag)
            lo = mid;
        else
            hi = mid;
    }
    const double az = 0.5 * (lo + hi);
    return itd_s < 0.0 ? -az : az;
}

LocalizationEstimate localize(const InterauralFeatures& features, const EarConfig& ear,
                              const LocalizationConfig& config, bool super_ear,
                              std::mt19937_64& rng) {
    LocalizationEstimate est;
    const double bound = max_itd(ear);
    const bool clamped = std::abs(features.itd_s) > bound + 1e-12;
    const double azimuth = invert_itd(features.itd_s, ear);
    est.azimuth_sigma_deg = clamped ? config.sigma_side_deg : sector_sigma(azimuth, config);
    est.front_back_resolved = false;

    double noisy = azimuth;
    if (!super_ear) {
        std::normal_distribution<double> noise(0.0, est.azimuth_sigma_deg);
        noisy += noise(rng);
    }
    est.azimuth_deg = wrap_deg(noisy);
    est.distance_confidence = DistanceConfidence::unknown;
    return est;
}

namespace {

double mirror_deg(double az) { return az >= 0.0 ? 180.0 - az : -180.0 - az; }

double fold_front_deg(double az) {
    const double w = wrap_deg(az);
    return std::abs(w) <= 90.0 ? w : mirror_deg(w);
}

} // namespace

std::optional<FrontBackResolution> resolve_front_back(std::span<const HeadingObservation> history,
                                                      double min_turn_deg) {
    if (history.size() < 2) return std::nullopt;
    const HeadingObservation& first = history.front();
    const HeadingObservation& last = history.back();
    const double turn = wrap_deg(last.heading_deg - first.heading_deg);
    if (std::abs(turn) < min_turn_deg) return std::nullopt;

    // Two world hypotheses from the first observation; the one whose
    // predicted folded image matches the last observation wins. This stays
    // exact even when the source crosses the interaural axis mid-turn.
    const double world_front = wrap_deg(first.estimate_deg + first.heading_deg);
    const double world_rear = wrap_deg(mirror_deg(first.estimate_deg) + first.heading_deg);
    const double pred_front = fold_front_deg(world_front - last.heading_deg);
    const double pred_rear = fold_front_deg(world_rear - last.heading_deg);
    const double err_front = std::abs(wrap_deg(pred_front - last.estimate_deg));
    const double err_rear = std::abs(wrap_deg(pred_rear - last.estimate_deg));

    // Reconstruct from the freshest observation under the chosen hypothesis.
    const double hyp_world = err_rear < err_front ? world_rear : world_front;
    const double hyp_rel = wrap_deg(hyp_world - last.heading_deg);
    FrontBackResolution res;
    res.rear = std::abs(hyp_rel) > 90.0; // behind, relative to the current heading
    const double rel = res.rear ? mirror_deg(last.estimate_deg) : last.estimate_deg;
    res.world_azimuth_deg = wrap_deg(rel + last.heading_deg);
    return res;
}

std::pair<std::optional<double>, DistanceConfidence> distance_estimate(
    double observed_level_db, std::optional<double> nominal_level_db) {
    if (!nominal_level_db) return {std::nullopt, DistanceConfidence::unknown};
    const double d = std::pow(10.0, (*nominal_level_db - observed_level_db) / 20.0);
    return {d, DistanceConfidence::coarse};
}

} // namespace earsim
