#include "earsim/segregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace earsim {

namespace {

constexpr double kAzScale = 15.0;   // deg per feature unit
constexpr double kChanScale = 3.0;  // channels per feature unit
constexpr double kOnsetScale = 0.1; // seconds per feature unit
constexpr double kPi = 3.14159265358979323846;

struct Feature {
    double az, chan, onset;
};

double sq(double v) { return v * v; }

double dist2(const Feature& a, const Feature& b) {
    return sq(a.az - b.az) + sq(a.chan - b.chan) + sq(a.onset - b.onset);
}

double azimuth_proxy(double ild_db, double channel_center_hz, const EarConfig& ear) {
    const double k = ild_scale_db(channel_center_hz, ear);
    const double s = std::clamp(ild_db / k, -1.0, 1.0);
    return std::asin(s) * 180.0 / kPi;
}

// Deterministic seeded k-means++ over the cell features.
std::vector<int> kmeans(const std::vector<Feature>& pts, int k, std::mt19937_64& rng,
                        std::vector<Feature>& centroids_out) {
    const int n = static_cast<int>(pts.size());
    std::vector<Feature> centroids;
    std::uniform_int_distribution<int> pick(0, n - 1);
    centroids.push_back(pts[static_cast<size_t>(pick(rng))]);
    std::vector<double> d2(static_cast<size_t>(n), 0.0);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const Feature& c : centroids)
                best = std::min(best, dist2(pts[static_cast<size_t>(i)], c));
            d2[static_cast<size_t>(i)] = best;
            total += best;
        }
        if (total <= 1e-12) break; // all points coincide with centroids
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        int chosen = n - 1;
        for (int i = 0; i < n; ++i) {
            r -= d2[static_cast<size_t>(i)];
            if (r <= 0.0) { chosen = i; break; }
        }
        centroids.push_back(pts[static_cast<size_t>(chosen)]);
    }
    const int kk = static_cast<int>(centroids.size());
    std::vector<int> assign(static_cast<size_t>(n), 0);
    for (int iter = 0; iter < 30; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::max();
            for (int c = 0; c < kk; ++c) {
                const double d =
                    dist2(pts[static_cast<size_t>(i)], centroids[static_cast<size_t>(c)]);
                if (d < bd) { bd = d; best = c; }
            }
            if (assign[static_cast<size_t>(i)] != best) {
                assign[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }
        std::vector<Feature> sums(static_cast<size_t>(kk), Feature{0, 0, 0});
        std::vector<int> counts(static_cast<size_t>(kk), 0);
        for (int i = 0; i < n; ++i) {
            const Feature& p = pts[static_cast<size_t>(i)];
            Feature& s = sums[static_cast<size_t>(assign[static_cast<size_t>(i)])];
            s.az += p.az;
            s.chan += p.chan;
            s.onset += p.onset;
            counts[static_cast<size_t>(assign[static_cast<size_t>(i)])]++;
        }
        for (int c = 0; c < kk; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) continue;
            centroids[static_cast<size_t>(c)] = {
                sums[static_cast<size_t>(c)].az / counts[static_cast<size_t>(c)],
                sums[static_cast<size_t>(c)].chan / counts[static_cast<size_t>(c)],
                sums[static_cast<size_t>(c)].onset / counts[static_cast<size_t>(c)]};
        }
        if (!changed) break;
    }
    centroids_out = centroids;
    return assign;
}

// Simplified silhouette: centroid distances instead of pairwise.
double silhouette(const std::vector<Feature>& pts, const std::vector<int>& assign,
                  const std::vector<Feature>& centroids) {
    if (centroids.size() < 2) return -1.0;
    double total = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const double a = std::sqrt(dist2(pts[i], centroids[static_cast<size_t>(assign[i])]));
        double b = std::numeric_limits<double>::max();
        for (size_t c = 0; c < centroids.size(); ++c) {
            if (static_cast<int>(c) == assign[i]) continue;
            b = std::min(b, std::sqrt(dist2(pts[i], centroids[c])));
        }
        const double m = std::max(a, b);
        total += m > 1e-12 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(pts.size());
}

} // namespace

SegregationResult segregate_window(std::span<const FrameObservation> window,
                                   const EarConfig& ear, const SegregationConfig& config,
                                   double background_db, std::mt19937_64& rng) {
    SegregationResult result;
    if (window.empty()) return result;
    const int n_ch = ear.channels;

    // First active time per channel, for the onset feature.
    std::vector<double> first_active(static_cast<size_t>(n_ch),
                                     std::numeric_limits<double>::quiet_NaN());
    for (const FrameObservation& obs : window) {
        for (int ch = 0; ch < n_ch; ++ch) {
            const size_t c = static_cast<size_t>(ch);
            const double e =
                0.5 * (obs.frame.left_db[c] + obs.frame.right_db[c]) - background_db;
            if (e > config.cell_threshold_db && std::isnan(first_active[c]))
                first_active[c] = obs.frame.t;
        }
    }

    for (size_t f = 0; f < window.size(); ++f) {
        const FrameObservation& obs = window[f];
        for (int ch = 0; ch < n_ch; ++ch) {
            const size_t c = static_cast<size_t>(ch);
            const double e =
                0.5 * (obs.frame.left_db[c] + obs.frame.right_db[c]) - background_db;
            if (e <= config.cell_threshold_db) continue; // null cluster
            Cell cell;
            cell.frame = static_cast<int>(f);
            cell.channel = ch;
            cell.t = obs.frame.t;
            cell.energy_db = e;
            cell.azimuth_proxy_deg =
                azimuth_proxy(obs.features.ild_db[c], ear.channel_center(ch), ear);
            cell.onset_t = first_active[c];
            cell.truth_source = obs.dominant_source[c];
            result.cells.push_back(std::move(cell));
        }
    }
    if (result.cells.empty()) return result;

    const double window_start = window.front().frame.t;
    std::vector<Feature> pts;
    pts.reserve(result.cells.size());
    for (const Cell& cell : result.cells)
        pts.push_back({cell.azimuth_proxy_deg / kAzScale, cell.channel / kChanScale,
                       (cell.onset_t - window_start) / kOnsetScale});

    std::set<std::tuple<double, double, double>> uniq;
    for (const Feature& p : pts) uniq.insert({p.az, p.chan, p.onset});
    const int k_max = std::min<int>(config.max_clusters, static_cast<int>(uniq.size()));

    std::vector<int> best_assign(result.cells.size(), 0);
    std::vector<Feature> best_centroids{Feature{0, 0, 0}};
    double best_score = -1.0;
    int best_k = 1;
    for (int k = 2; k <= k_max; ++k) {
        std::vector<Feature> centroids;
        std::vector<int> assign = kmeans(pts, k, rng, centroids);
        const double score = silhouette(pts, assign, centroids);
        if (score > best_score) {
            best_score = score;
            best_assign = assign;
            best_centroids = centroids;
            best_k = static_cast<int>(centroids.size());
        }
    }
    if (best_score < config.silhouette_min) {
        best_k = 1;
        std::fill(best_assign.begin(), best_assign.end(), 0);
        best_centroids.assign(1, Feature{0, 0, 0});
    }

    // Merge clusters the split should not have separated: matching azimuth
    // and onset with touching channel ranges is one spectrally contiguous
    // source, not two.
    std::vector<int> remap(static_cast<size_t>(best_k));
    for (int i = 0; i < best_k; ++i) remap[static_cast<size_t>(i)] = i;
    if (best_k > 1) {
        const double bg_pow_merge = std::pow(10.0, background_db / 10.0);
        struct Agg {
            double az = 0, onset = 0, power = 0;
            int chan_min = 1 << 20, chan_max = -1;
            int n = 0;
        };
        std::vector<Agg> agg(static_cast<size_t>(best_k));
        for (size_t i = 0; i < result.cells.size(); ++i) {
            Agg& a = agg[static_cast<size_t>(best_assign[i])];
            a.az += result.cells[i].azimuth_proxy_deg;
            a.onset += result.cells[i].onset_t;
            a.power += bg_pow_merge * (std::pow(10.0, result.cells[i].energy_db / 10.0) - 1.0);
            a.chan_min = std::min(a.chan_min, result.cells[i].channel);
            a.chan_max = std::max(a.chan_max, result.cells[i].channel);
            a.n++;
        }
        auto root = [&](int c) {
            while (remap[static_cast<size_t>(c)] != c) c = remap[static_cast<size_t>(c)];
            return c;
        };
        for (int a = 0; a < best_k; ++a) {
            for (int b = a + 1; b < best_k; ++b) {
                const Agg& aa = agg[static_cast<size_t>(a)];
                const Agg& ab = agg[static_cast<size_t>(b)];
                if (aa.n == 0 || ab.n == 0) continue;
                const double az_gap = std::abs(aa.az / aa.n - ab.az / ab.n);
                const double onset_gap = std::abs(aa.onset / aa.n - ab.onset / ab.n);
                const int chan_gap =
                    std::max(ab.chan_min - aa.chan_max, aa.chan_min - ab.chan_max);
                if (chan_gap > 2 || onset_gap >= 0.15) continue;
                // A faint spectrally-contiguous fringe belongs to its strong
                // neighbour: near-background cells carry no usable ILD, so
                // their azimuth disagreement is noise, not evidence. 20 dB
                // down still counts as a source in its own right.
                const double power_ratio = std::min(aa.power, ab.power) /
                                           std::max(std::max(aa.power, ab.power), 1e-300);
                if (az_gap < config.gate_azimuth_deg || power_ratio < 0.01)
                    remap[static_cast<size_t>(root(b))] = root(a);
            }
        }
        for (int c = 0; c < best_k; ++c) remap[static_cast<size_t>(c)] = root(c);
    }

    // Compact cluster indices, ordered by (onset, azimuth) for determinism.
    std::map<int, int> compact;
    std::vector<int> final_assign(result.cells.size());
    for (size_t i = 0; i < result.cells.size(); ++i) {
        const int c = remap[static_cast<size_t>(best_assign[i])];
        if (!compact.count(c)) compact[c] = static_cast<int>(compact.size());
        final_assign[i] = compact[c];
    }
    int n_clusters = static_cast<int>(compact.size());

    const double bg_pow = std::pow(10.0, background_db / 10.0);
    struct Build {
        double az_num = 0, w = 0, onset = std::numeric_limits<double>::max();
        std::vector<double> sig;
        std::map<std::string, double> truth;
        double last_frame_pow = 0;
        int cells = 0;
    };
    std::vector<Build> builds(static_cast<size_t>(n_clusters));
    for (Build& b : builds) b.sig.assign(static_cast<size_t>(n_ch), 0.0);
    const int last_frame = static_cast<int>(window.size()) - 1;
    for (size_t i = 0; i < result.cells.size(); ++i) {
        const Cell& cell = result.cells[i];
        Build& b = builds[static_cast<size_t>(final_assign[i])];
        const double p_above = bg_pow * (std::pow(10.0, cell.energy_db / 10.0) - 1.0);
        b.az_num += cell.azimuth_proxy_deg * p_above;
        b.w += p_above;
        b.onset = std::min(b.onset, cell.onset_t);
        b.sig[static_cast<size_t>(cell.channel)] += p_above;
        if (!cell.truth_source.empty()) b.truth[cell.truth_source] += p_above;
        if (cell.frame == last_frame) b.last_frame_pow += p_above;
        b.cells++;
    }

    // Reporting floor: clusters without appreciable energy stay in the null
    // bucket instead of becoming streams.
    {
        std::vector<int> keep_map(static_cast<size_t>(n_clusters), -1);
        int kept = 0;
        const int frames_in_window = static_cast<int>(window.size());
        for (int i = 0; i < n_clusters; ++i) {
            const Build& b = builds[static_cast<size_t>(i)];
            const double loud_last =
                b.last_frame_pow > 0 ? 10.0 * std::log10(b.last_frame_pow / bg_pow) : -1e9;
            const double loud_mean =
                b.w > 0 ? 10.0 * std::log10(b.w / frames_in_window / bg_pow) : -1e9;
            if (std::max(loud_last, loud_mean) >= config.min_cluster_db)
                keep_map[static_cast<size_t>(i)] = kept++;
        }
        if (kept != n_clusters) {
            std::vector<Build> kept_builds;
            for (int i = 0; i < n_clusters; ++i)
                if (keep_map[static_cast<size_t>(i)] >= 0)
                    kept_builds.push_back(std::move(builds[static_cast<size_t>(i)]));
            builds = std::move(kept_builds);
            for (int& a : final_assign) a = keep_map[static_cast<size_t>(a)];
            n_clusters = kept;
        }
    }

    std::vector<int> order(static_cast<size_t>(n_clusters));
    for (int i = 0; i < n_clusters; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Build& ba = builds[static_cast<size_t>(a)];
        const Build& bb = builds[static_cast<size_t>(b)];
        if (ba.onset != bb.onset) return ba.onset < bb.onset;
        return ba.az_num / std::max(ba.w, 1e-12) < bb.az_num / std::max(bb.w, 1e-12);
    });
    std::vector<int> rank(static_cast<size_t>(n_clusters));
    for (int i = 0; i < n_clusters; ++i)
        rank[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;

    result.clusters.resize(static_cast<size_t>(n_clusters));
    for (int i = 0; i < n_clusters; ++i) {
        const Build& b = builds[static_cast<size_t>(i)];
        ClusterObservation obs;
        obs.azimuth_rel_deg = b.w > 0 ? b.az_num / b.w : 0.0;
        double sum = 0.0;
        for (double v : b.sig) sum += v;
        obs.signature = b.sig;
        if (sum > 0)
            for (double& v : obs.signature) v /= sum;
        obs.loudness_db = b.last_frame_pow > 0
                              ? 10.0 * std::log10(b.last_frame_pow / bg_pow)
                              : (b.w > 0 ? 10.0 * std::log10(b.w / bg_pow) : -120.0);
        obs.onset_t = b.onset;
        obs.centroid_hz = spectral_centroid_hz(obs.signature, ear);
        double best = 0.0;
        for (const auto& [src, p] : b.truth)
            if (p > best) {
                best = p;
                obs.dominant_source = src;
            }
        obs.cell_count = b.cells;
        result.clusters[static_cast<size_t>(rank[static_cast<size_t>(i)])] = std::move(obs);
    }
    result.assignments.resize(result.cells.size());
    for (size_t i = 0; i < result.cells.size(); ++i)
        result.assignments[i] =
            final_assign[i] < 0 ? -1 : rank[static_cast<size_t>(final_assign[i])];
    return result;
}

std::vector<const StreamTrack*> StreamTracker::live_tracks() const {
    std::vector<const StreamTrack*> out;
    for (const StreamTrack& t : tracks_)
        if (t.alive) out.push_back(&t);
    return out;
}

const StreamTrack* StreamTracker::track(int64_t stream_id) const {
    for (const StreamTrack& t : tracks_)
        if (t.stream_id == stream_id) return &t;
    return nullptr;
}

bool StreamTracker::is_live(int64_t stream_id) const {
    const StreamTrack* t = track(stream_id);
    return t && t->alive;
}

int64_t StreamTracker::fresh_heard_id() {
    if (heard_id_counter_) return (*heard_id_counter_)++;
    return fallback_heard_counter_++;
}

double estimate_doppler(const StreamTrack& track, const OntologyRegistry& registry,
                        const EarConfig& ear) {
    if (track.updates < 5) return 1.0;
    if (!track.category.template_id.empty()) {
        const SoundTemplate* tpl = registry.sound_template(track.category.template_id);
        if (tpl) {
            const double ref = tpl->centroid_hz(ear);
            if (ref > 0.0 && track.centroid_hz > 0.0) return track.centroid_hz / ref;
        }
    }
    if (track.birth_centroid_hz > 0.0 && track.centroid_hz > 0.0)
        return track.centroid_hz / track.birth_centroid_hz;
    return 1.0;
}

void StreamTracker::apply_observation(StreamTrack& track, const ClusterObservation& obs, double t,
                                      double head_heading_deg, const OntologyRegistry& registry,
                                      std::mt19937_64& rng) {
    const double sigma = sector_sigma(obs.azimuth_rel_deg, loc_);
    double rel = obs.azimuth_rel_deg;
    if (!super_ear_) {
        std::normal_distribution<double> noise(0.0, sigma * seg_.azimuth_noise_scale);
        rel += noise(rng);
    }
    const double world = wrap_deg(rel + head_heading_deg);

    if (track.updates == 0) {
        track.world_azimuth_deg = world;
        track.signature_estimate = obs.signature;
        track.birth_centroid_hz = obs.centroid_hz;
    } else {
        track.world_azimuth_deg =
            wrap_deg(track.world_azimuth_deg + 0.4 * wrap_deg(world - track.world_azimuth_deg));
        for (size_t i = 0; i < track.signature_estimate.size(); ++i)
            track.signature_estimate[i] =
                0.7 * track.signature_estimate[i] + 0.3 * obs.signature[i];
        double sum = 0.0;
        for (double v : track.signature_estimate) sum += v;
        if (sum > 0)
            for (double& v : track.signature_estimate) v /= sum;
    }

    LocalizationEstimate est;
    est.azimuth_deg = wrap_deg(rel);
    est.azimuth_sigma_deg = sigma;
    est.front_back_resolved = false;
    track.azimuth_track.push_back(est);

    track.loudness_db = obs.loudness_db;
    track.centroid_hz = obs.centroid_hz;
    track.dominant_source = obs.dominant_source;
    track.last_update = t;
    track.updates++;

    track.doppler_ratio = estimate_doppler(track, registry, ear_);
    const std::vector<double> corrected =
        doppler_shift_signature(track.signature_estimate, 1.0 / track.doppler_ratio, ear_);
    const Envelope env = track.repetition_seen ? Envelope::repeating : obs.envelope;
    track.category = registry.classify(corrected, env);
    // Second pass once a template is in hand: refine the ratio against the
    // template's reference centroid and re-correct.
    const double refined = estimate_doppler(track, registry, ear_);
    if (std::abs(refined - track.doppler_ratio) > 1e-6) {
        track.doppler_ratio = refined;
        const std::vector<double> again =
            doppler_shift_signature(track.signature_estimate, 1.0 / refined, ear_);
        track.category = registry.classify(again, env);
    }
}

std::vector<int64_t> StreamTracker::update(const std::vector<ClusterObservation>& clusters,
                                           double t, double head_heading_deg,
                                           const OntologyRegistry& registry,
                                           std::mt19937_64& rng) {
    // Expire tracks that have been silent past the window.
    std::vector<int64_t> closed;
    for (StreamTrack& track : tracks_) {
        if (track.alive && t - track.last_update > seg_.expiry_s) {
            track.alive = false;
            track.closed_at = t;
            closed.push_back(track.stream_id);
        }
    }

    struct Pair {
        double cost;
        size_t cluster;
        size_t track;
    };
    std::vector<Pair> pairs;
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        const ClusterObservation& obs = clusters[ci];
        const double obs_world = wrap_deg(obs.azimuth_rel_deg + head_heading_deg);
        for (size_t ti = 0; ti < tracks_.size(); ++ti) {
            const StreamTrack& track = tracks_[ti];
            if (!track.alive) continue;
            const double az_d = std::abs(wrap_deg(obs_world - track.world_azimuth_deg));
            const double cos_d =
                1.0 - cosine_similarity(obs.signature, track.signature_estimate);
            // Gates widen while the spectrum is drifting so a Doppler-shifted
            // source is not dropped.
            const double cos_gate =
                seg_.gate_cosine_distance * (1.0 + 2.0 * std::abs(track.doppler_ratio - 1.0));
            if (az_d > seg_.gate_azimuth_deg || cos_d > cos_gate) continue;
            pairs.push_back({az_d / seg_.gate_azimuth_deg + cos_d / cos_gate, ci, ti});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.cluster != b.cluster) return a.cluster < b.cluster;
        return a.track < b.track;
    });

    std::vector<bool> cluster_used(clusters.size(), false);
    std::set<size_t> track_used;
    for (const Pair& p : pairs) {
        if (cluster_used[p.cluster] || track_used.count(p.track)) continue;
        cluster_used[p.cluster] = true;
        track_used.insert(p.track);
        apply_observation(tracks_[p.track], clusters[p.cluster], t, head_heading_deg, registry,
                          rng);
    }

    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        if (cluster_used[ci]) continue;
        const ClusterObservation& obs = clusters[ci];
        const double obs_world = wrap_deg(obs.azimuth_rel_deg + head_heading_deg);

        // A repeating template restarting after silence revives its track.
        StreamTrack* revived = nullptr;
        const Classification guess = registry.classify(obs.signature, Envelope::repeating);
        const SoundTemplate* tpl =
            guess.template_id.empty() ? nullptr : registry.sound_template(guess.template_id);
        if (tpl && tpl->envelope == Envelope::repeating) {
            for (size_t ti = 0; ti < tracks_.size(); ++ti) {
                StreamTrack& track = tracks_[ti];
                if (track.alive || track_used.count(ti)) continue;
                if (t - track.closed_at > seg_.revive_window_s) continue;
                const double az_d = std::abs(wrap_deg(obs_world - track.world_azimuth_deg));
                const double cos_d =
                    1.0 - cosine_similarity(obs.signature, track.signature_estimate);
                if (az_d <= seg_.gate_azimuth_deg && cos_d <= seg_.gate_cosine_distance) {
                    revived = &track;
                    track_used.insert(ti);
                    break;
                }
            }
        }
        if (revived) {
            revived->alive = true;
            revived->repetition_seen = true;
            apply_observation(*revived, obs, t, head_heading_deg, registry, rng);
            std::erase(closed, revived->stream_id);
            continue;
        }

        StreamTrack track;
        track.stream_id = next_stream_id_++;
        track.heard_id = fresh_heard_id();
        track.birth = t;
        track.last_update = t;
        tracks_.push_back(std::move(track));
        apply_observation(tracks_.back(), obs, t, head_heading_deg, registry, rng);
    }
    return closed;
}

HeardObject identify_stream(const StreamTrack& track, const OntologyRegistry& registry,
                            const EarConfig& ear, const ActiveSpeech& speech,
                            const std::vector<std::string>& loaded_words,
                            const std::vector<std::string>& permanent_words, bool intelligible,
                            double now, double match_threshold,
                            std::optional<double> distance_hint) {
    (void)ear;
    HeardObject h;
    h.id = track.heard_id;
    h.stream_id = track.stream_id;
    h.category_id = track.category.category;
    h.category_confidence = track.category.confidence;
    h.matched_template = track.category.template_id;
    if (!track.azimuth_track.empty()) {
        h.azimuth_deg = track.azimuth_track.back().azimuth_deg;
        h.azimuth_sigma_deg = track.azimuth_track.back().azimuth_sigma_deg;
    }
    h.distance_m = distance_hint;
    h.onset_s = track.birth;
    h.duration_s = now - track.birth;
    h.repetition = track.repetition_seen;
    h.loudness_db = track.loudness_db;
    h.centroid_hz = track.centroid_hz;
    h.station_tag = track.station_tag;
    h.novelty = (track.category.confidence < match_threshold ||
                 track.category.category == OntologyRegistry::unknown_category_id)
                    ? Novelty::new_type
                    : Novelty::known_type;
    const SoundTemplate* tpl =
        track.category.template_id.empty() ? nullptr
                                           : registry.sound_template(track.category.template_id);
    if (tpl) h.modifiers = tpl->modifiers;

    if (speech.present) {
        SpeechInfo info;
        info.speaker_id = speech.speaker_id;
        info.sex = speech.sex;
        auto loaded = [&](const std::string& w) {
            if (std::find(permanent_words.begin(), permanent_words.end(), w) !=
                permanent_words.end())
                return true;
            if (!intelligible) return false; // unfocused streams match only permanent words
            return std::find(loaded_words.begin(), loaded_words.end(), w) != loaded_words.end();
        };
        for (const auto& [w, wt] : speech.words)
            if (loaded(w)) info.words.emplace_back(w, wt);
        h.speech = std::move(info);
    }
    return h;
}

} // namespace earsim
