#include <doctest.h>

#include <deque>
#include <random>
#include <set>

#include "earsim/segregation.hpp"
#include "helpers.hpp"

using namespace earsim;
using namespace earsim::test;

namespace {

struct MiniPipeline {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::builtin(32);
    std::mt19937_64 rng{7};
    std::deque<FrameObservation> window;
    StreamTracker tracker{cfg.ear, cfg.localization, cfg.segregation, /*super_ear=*/true};

    SegregationResult push_frame(const AuditoryScene& scene, double heading, double t) {
        window.push_back(render_observation(scene, reg, cfg.ear, heading, t, true));
        while (window.size() > static_cast<size_t>(cfg.segregation.window_frames))
            window.pop_front();
        std::vector<FrameObservation> w(window.begin(), window.end());
        return segregate_window(w, cfg.ear, cfg.segregation, scene.background_db, rng);
    }

    void run(const AuditoryScene& scene, double heading_fn(double), double until) {
        for (double t = 0.0; t <= until + 1e-9; t += scene.frame_hop_s) {
            SegregationResult seg = push_frame(scene, heading_fn(t), t);
            tracker.update(seg.clusters, t, heading_fn(t), reg, rng);
        }
    }
};

double heading_zero(double) { return 0.0; }

} // namespace

TEST_CASE("single loud source yields exactly one cluster") {
    MiniPipeline p;
    AuditoryScene scene = empty_scene(2.0);
    scene.sources.push_back(simple_source("solo", "speech_female", 15.0, 2.0, 75.0, 0.0, 2.0));
    SegregationResult seg;
    for (double t = 0.0; t <= 0.4; t += scene.frame_hop_s) seg = p.push_frame(scene, 0.0, t);
    CHECK(seg.clusters.size() == 1);
    CHECK(seg.clusters[0].dominant_source == "solo");
    CHECK(std::abs(seg.clusters[0].azimuth_rel_deg - 15.0) < 8.0);
}

TEST_CASE("silence yields only the null cluster") {
    MiniPipeline p;
    AuditoryScene scene = empty_scene(1.0);
    SegregationResult seg;
    for (double t = 0.0; t <= 0.3; t += scene.frame_hop_s) seg = p.push_frame(scene, 0.0, t);
    CHECK(seg.clusters.empty());
    CHECK(seg.cells.empty());
}

TEST_CASE("two disjoint-band sources separate with >=90% cell accuracy") {
    MiniPipeline p;
    // centroids around 500 Hz vs 4 kHz, azimuths +-40
    AuditoryScene scene = empty_scene(2.0);
    scene.sources.push_back(simple_source("low", "truck_idle", -40.0, 2.0, 75.0, 0.0, 2.0));
    scene.sources.push_back(simple_source("high", "bird_chirp", 40.0, 2.0, 75.0, 0.0, 2.0));
    SegregationResult seg;
    for (double t = 0.0; t <= 0.4; t += scene.frame_hop_s) seg = p.push_frame(scene, 0.0, t);
    REQUIRE(seg.clusters.size() == 2);

    int correct = 0, labelled = 0;
    for (size_t i = 0; i < seg.cells.size(); ++i) {
        if (seg.cells[i].truth_source.empty() || seg.assignments[i] < 0) continue;
        ++labelled;
        const ClusterObservation& cl = seg.clusters[static_cast<size_t>(seg.assignments[i])];
        if (cl.dominant_source == seg.cells[i].truth_source) ++correct;
    }
    REQUIRE(labelled > 0);
    CHECK(static_cast<double>(correct) / labelled >= 0.9);
}

TEST_CASE("moving source keeps one continuous track") {
    MiniPipeline p;
    AuditoryScene scene = empty_scene(10.0);
    SoundSource s = simple_source("mover", "speech_female", 0.0, 2.0, 78.0, 0.0, 10.0);
    s.trajectory = {{0.0, -40.0, 2.0}, {10.0, 40.0, 2.0}};
    scene.sources.push_back(s);
    p.run(scene, heading_zero, 9.9);

    int tracks_for_mover = 0;
    for (const StreamTrack& t : p.tracker.tracks())
        if (t.dominant_source == "mover") ++tracks_for_mover;
    CHECK(tracks_for_mover == 1);
    CHECK(p.tracker.tracks().size() == 1);
}

TEST_CASE("a head turn does not break a stationary track") {
    MiniPipeline p;
    AuditoryScene scene = empty_scene(4.0);
    scene.sources.push_back(simple_source("fixed", "speech_female", 20.0, 2.0, 78.0, 0.0, 4.0));
    // the ear swings 30 degrees between t=1 and t=1.15 (200 deg/s)
    auto heading = +[](double t) {
        if (t < 1.0) return 0.0;
        if (t > 1.15) return 30.0;
        return (t - 1.0) * 200.0;
    };
    p.run(scene, heading, 3.9);
    CHECK(p.tracker.tracks().size() == 1);
    CHECK(p.tracker.tracks()[0].alive);
    // world azimuth stays put even though the relative azimuth moved
    CHECK(std::abs(wrap_deg(p.tracker.tracks()[0].world_azimuth_deg - 20.0)) < 8.0);
}

TEST_CASE("repetition: a repeating template revives its track, others do not") {
    SUBCASE("repeating template") {
        MiniPipeline p;
        AuditoryScene scene = empty_scene(8.0);
        SoundSource s = simple_source("chirper", "bird_chirp", 10.0, 1.0, 70.0, 0.0, 0.5);
        s.repeat = Repeat{3.0}; // 0.5 s on, 2.5 s silent > expiry window
        scene.sources.push_back(s);
        p.run(scene, heading_zero, 7.9);
        CHECK(p.tracker.tracks().size() == 1);
        CHECK(p.tracker.tracks()[0].repetition_seen);
    }
    SUBCASE("non-repeating template births a fresh track") {
        MiniPipeline p;
        AuditoryScene scene = empty_scene(8.0);
        scene.sources.push_back(simple_source("say1", "speech_female", 10.0, 1.0, 70.0, 0.0, 0.5));
        scene.sources.push_back(simple_source("say2", "speech_female", 10.0, 1.0, 70.0, 3.0, 0.5));
        p.run(scene, heading_zero, 7.9);
        CHECK(p.tracker.tracks().size() == 2);
        std::set<int64_t> ids;
        for (const StreamTrack& t : p.tracker.tracks()) ids.insert(t.stream_id);
        CHECK(ids.size() == 2); // stream ids never reused
    }
}

TEST_CASE("doppler ratio from a fast approach and recession") {
    const double c = 343.0;
    const double v = c / 20.0; // 17.15 m/s

    SUBCASE("stationary is ~1") {
        MiniPipeline p;
        AuditoryScene scene = empty_scene(3.0);
        scene.sources.push_back(simple_source("s", "speech_female", 0.0, 5.0, 85.0, 0.0, 3.0));
        p.run(scene, heading_zero, 2.9);
        REQUIRE(p.tracker.tracks().size() == 1);
        CHECK(p.tracker.tracks()[0].doppler_ratio == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("approaching shifts up") {
        MiniPipeline p;
        AuditoryScene scene = empty_scene(3.0);
        SoundSource s = simple_source("s", "speech_female", 0.0, 60.0, 105.0, 0.0, 3.0);
        s.trajectory = {{0.0, 0.0, 60.0}, {3.0, 0.0, 60.0 - 3.0 * v}};
        scene.sources.push_back(s);
        p.run(scene, heading_zero, 2.9);
        REQUIRE(!p.tracker.tracks().empty());
        const double expected = c / (c - v); // closed form for an approaching emitter
        CHECK(std::abs(p.tracker.tracks()[0].doppler_ratio - expected) < 0.1 * expected);
        CHECK(p.tracker.tracks()[0].category.category == "HumanMade/Speech");
    }
    SUBCASE("receding shifts down and classification still matches") {
        MiniPipeline p;
        AuditoryScene scene = empty_scene(3.0);
        SoundSource s = simple_source("s", "speech_female", 0.0, 8.0, 90.0, 0.0, 3.0);
        s.trajectory = {{0.0, 0.0, 8.0}, {3.0, 0.0, 8.0 + 3.0 * v}};
        scene.sources.push_back(s);
        p.run(scene, heading_zero, 2.9);
        REQUIRE(!p.tracker.tracks().empty());
        const double expected = c / (c + v);
        CHECK(std::abs(p.tracker.tracks()[0].doppler_ratio - expected) < 0.1 * expected);
        CHECK(p.tracker.tracks()[0].category.category == "HumanMade/Speech");
    }
}

TEST_CASE("identify_stream: word gating") {
    StreamTrack track;
    track.stream_id = 5;
    track.heard_id = 11;
    track.birth = 1.0;
    track.loudness_db = 40.0;
    track.category = {"HumanMade/Speech", 0.95, "speech_female"};
    LocalizationEstimate est;
    est.azimuth_deg = 10.0;
    est.azimuth_sigma_deg = 2.0;
    track.azimuth_track.push_back(est);

    OntologyRegistry reg = OntologyRegistry::builtin(32);
    EarConfig ear;
    ear.finalize();

    ActiveSpeech speech;
    speech.present = true;
    speech.speaker_id = "spk1";
    speech.sex = "female";
    speech.words = {{"HAL", 2.0}, {"gradient", 2.4}, {"alpha", 2.8}};

    const std::vector<std::string> loaded = {"alpha"};
    const std::vector<std::string> permanent = {"HAL"};

    SUBCASE("intelligible stream matches loaded and permanent words") {
        HeardObject h = identify_stream(track, reg, ear, speech, loaded, permanent, true, 3.0,
                                        0.75, std::nullopt);
        REQUIRE(h.speech.has_value());
        REQUIRE(h.speech->words.size() == 2);
        CHECK(h.speech->words[0].first == "HAL");
        CHECK(h.speech->words[1].first == "alpha");
        CHECK(h.speech->speaker_id == "spk1");
        CHECK(h.speech->sex == "female");
    }
    SUBCASE("unintelligible stream matches only permanent words") {
        HeardObject h = identify_stream(track, reg, ear, speech, loaded, permanent, false, 3.0,
                                        0.75, std::nullopt);
        REQUIRE(h.speech.has_value());
        REQUIRE(h.speech->words.size() == 1);
        CHECK(h.speech->words[0].first == "HAL");
    }
    SUBCASE("dog track reports its category") {
        StreamTrack dog = track;
        dog.category = {"Natural/Mammals/Dog", 0.97, "dog_bark"};
        HeardObject h = identify_stream(dog, reg, ear, ActiveSpeech{}, {}, {}, true, 3.0, 0.75,
                                        std::nullopt);
        CHECK(h.category_id == "Natural/Mammals/Dog");
        CHECK_FALSE(h.speech.has_value());
        CHECK(h.modifiers.count("type of sound"));
        CHECK(h.novelty == Novelty::known_type);
    }
}
