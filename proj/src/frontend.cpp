#include "earsim/frontend.hpp"

#include <algorithm>
#include <cmath>

namespace earsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSilenceFloorDb = -120.0;

double deg2rad(double d) { return d * kPi / 180.0; }
double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
} // namespace

double max_itd(const EarConfig& config) {
    return config.head_radius_m / config.speed_of_sound_mps * (kPi / 2.0 + 1.0);
}

double itd_model(double relative_azimuth_deg, const EarConfig& config) {
    const double az = wrap_deg(relative_azimuth_deg);
    const double mag = std::abs(az);
    const double folded = mag <= 90.0 ? mag : 180.0 - mag; // rear mirrors front
    const double theta = deg2rad(folded);
    const double itd = config.head_radius_m / config.speed_of_sound_mps * (theta + std::sin(theta));
    return az < 0.0 ? -itd : itd;
}

double ild_scale_db(double channel_center_hz, const EarConfig& config) {
    const double span = std::log(config.fmax_hz / config.fmin_hz);
    const double frac =
        std::clamp(std::log(channel_center_hz / config.fmin_hz) / span, 0.0, 1.0);
    return 2.0 + 8.0 * frac; // head shadow grows with frequency
}

double ild_model(double relative_azimuth_deg, double channel_center_hz, const EarConfig& config) {
    const double az = wrap_deg(relative_azimuth_deg);
    return ild_scale_db(channel_center_hz, config) * std::sin(deg2rad(az));
}

std::vector<double> doppler_shift_signature(std::span<const double> signature, double ratio,
                                            const EarConfig& config) {
    std::vector<double> out(signature.begin(), signature.end());
    if (!(ratio > 0.0) || std::abs(ratio - 1.0) < 1e-9 || signature.size() < 2) return out;
    const int n = static_cast<int>(signature.size());
    const double step = std::log(config.fmax_hz / config.fmin_hz) / (n - 1);
    const double shift = std::log(ratio) / step; // channels, + = towards high bands
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = i - shift;
        const int j0 = static_cast<int>(std::floor(x));
        const double frac = x - j0;
        double v = 0.0;
        if (j0 >= 0 && j0 < n) v += signature[static_cast<size_t>(j0)] * (1.0 - frac);
        if (j0 + 1 >= 0 && j0 + 1 < n) v += signature[static_cast<size_t>(j0 + 1)] * frac;
        out[static_cast<size_t>(i)] = v;
        sum += v;
    }
    if (sum <= 0.0) return std::vector<double>(signature.begin(), signature.end());
    for (double& v : out) v /= sum;
    return out;
}

double spectral_centroid_hz(std::span<const double> weights, const EarConfig& config) {
    double num = 0.0, den = 0.0;
    const int n = std::min<int>(static_cast<int>(weights.size()), config.channels);
    for (int i = 0; i < n; ++i) {
        num += weights[static_cast<size_t>(i)] * config.channel_center(i);
        den += weights[static_cast<size_t>(i)];
    }
    return den > 0.0 ? num / den : 0.0;
}

FrameObservation render_observation(const AuditoryScene& scene, const OntologyRegistry& registry,
                                    const EarConfig& config, double head_heading_deg, double t,
                                    bool with_sensitivity) {
    const int n = config.channels;
    FrameObservation obs;
    obs.frame.t = t;
    obs.features.t = t;
    obs.frame.left_db.assign(static_cast<size_t>(n), scene.background_db);
    obs.frame.right_db.assign(static_cast<size_t>(n), scene.background_db);
    obs.features.ild_db.assign(static_cast<size_t>(n), 0.0);
    obs.dominant_source.assign(static_cast<size_t>(n), "");

    std::vector<double> left_pow(static_cast<size_t>(n), 0.0);
    std::vector<double> right_pow(static_cast<size_t>(n), 0.0);
    std::vector<double> best_contrib(static_cast<size_t>(n), 0.0);

    double itd_num = 0.0, itd_den = 0.0;

    for (const SoundSource& src : scene.sources) {
        const SourceState st = source_state_at(scene, src, t);
        if (!st.active) continue;
        // Dynamic-range gate: quieter than 10 dB above background is inaudible.
        if (st.level_at_ear_db < scene.background_db + EarConfig::min_gate_db) continue;
        const SoundTemplate* tpl = registry.sound_template(src.template_id);
        if (!tpl) continue;

        const double rel_az = wrap_deg(st.azimuth_deg - head_heading_deg);
        const double doppler_ratio =
            config.speed_of_sound_mps / (config.speed_of_sound_mps + st.radial_velocity_mps);
        const std::vector<double> sig =
            doppler_shift_signature(tpl->spectral_signature, doppler_ratio, config);
        const double emphasis = config.in_front_sector(rel_az) ? config.front_emphasis_db : 0.0;
        const double source_level = st.level_at_ear_db + emphasis;

        itd_num += db_to_power(source_level) * itd_model(rel_az, config);
        itd_den += db_to_power(source_level);

        for (int ch = 0; ch < n; ++ch) {
            const double frac = sig[static_cast<size_t>(ch)];
            if (frac <= 0.0) continue;
            const double ch_db = source_level + 10.0 * std::log10(frac);
            const double ild = ild_model(rel_az, config.channel_center(ch), config);
            const double lp = db_to_power(ch_db - ild / 2.0);
            const double rp = db_to_power(ch_db + ild / 2.0);
            left_pow[static_cast<size_t>(ch)] += lp;
            right_pow[static_cast<size_t>(ch)] += rp;
            if (lp + rp > best_contrib[static_cast<size_t>(ch)]) {
                best_contrib[static_cast<size_t>(ch)] = lp + rp;
                obs.dominant_source[static_cast<size_t>(ch)] = src.id;
            }
        }
    }

    const double bg_pow = db_to_power(scene.background_db);
    const double ceiling = scene.background_db + EarConfig::max_gate_db;
    for (int ch = 0; ch < n; ++ch) {
        const size_t c = static_cast<size_t>(ch);
        if (left_pow[c] > 0.0)
            obs.frame.left_db[c] =
                std::min(10.0 * std::log10(bg_pow + left_pow[c]), ceiling);
        if (right_pow[c] > 0.0)
            obs.frame.right_db[c] =
                std::min(10.0 * std::log10(bg_pow + right_pow[c]), ceiling);
    }

    if (with_sensitivity) obs.frame = apply_sensitivity(std::move(obs.frame), config, scene.background_db);

    double signal_pow = 0.0;
    for (int ch = 0; ch < n; ++ch) {
        const size_t c = static_cast<size_t>(ch);
        obs.features.ild_db[c] = obs.frame.right_db[c] - obs.frame.left_db[c];
        const double mean_pow =
            0.5 * (db_to_power(obs.frame.left_db[c]) + db_to_power(obs.frame.right_db[c]));
        signal_pow += std::max(mean_pow - bg_pow, 0.0);
    }
    obs.features.itd_s = itd_den > 0.0 ? itd_num / itd_den : 0.0;
    obs.features.summed_loudness_db =
        signal_pow > 0.0
            ? std::max(10.0 * std::log10(signal_pow / bg_pow), kSilenceFloorDb)
            : kSilenceFloorDb;
    return obs;
}

CochleagramFrame render_frame(const AuditoryScene& scene, const OntologyRegistry& registry,
                              const EarConfig& config, double head_heading_deg, double t) {
    return render_observation(scene, registry, config, head_heading_deg, t, false).frame;
}

InterauralFeatures interaural_features(const AuditoryScene& scene, const OntologyRegistry& registry,
                                       const EarConfig& config, double head_heading_deg, double t) {
    return render_observation(scene, registry, config, head_heading_deg, t, false).features;
}

CochleagramFrame apply_sensitivity(CochleagramFrame frame, const EarConfig& config,
                                   double background_db) {
    const size_t n = std::min(frame.left_db.size(), config.sensitivity_shift_db.size());
    for (size_t ch = 0; ch < n; ++ch) {
        const double shift = config.sensitivity_shift_db[ch];
        if (shift == 0.0) continue;
        frame.left_db[ch] = std::max(background_db, frame.left_db[ch] - shift);
        frame.right_db[ch] = std::max(background_db, frame.right_db[ch] - shift);
    }
    return frame;
}

} // namespace earsim
