#include <doctest.h>

#include <cmath>

#include "earsim/frontend.hpp"
#include "helpers.hpp"

using namespace earsim;
using namespace earsim::test;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("itd_model matches the closed form at 90 degrees") {
    EarConfig ear;
    ear.finalize();
    // independent evaluation of (r/c)(pi/2 + 1)
    const double expected = (0.0875 / 343.0) * (kPi / 2.0 + 1.0);
    CHECK(std::abs(itd_model(90.0, ear) - expected) < 1e-9);
    CHECK(itd_model(0.0, ear) == 0.0);
}

TEST_CASE("itd_model antisymmetry over a 1 degree grid") {
    EarConfig ear;
    ear.finalize();
    for (int a = -179; a < 180; ++a) {
        CHECK(itd_model(-static_cast<double>(a), ear) ==
              doctest::Approx(-itd_model(static_cast<double>(a), ear)).epsilon(1e-15));
    }
}

TEST_CASE("itd bound holds everywhere") {
    EarConfig ear;
    ear.finalize();
    const double bound = max_itd(ear);
    for (double a = -180.0; a < 180.0; a += 0.25)
        CHECK(std::abs(itd_model(a, ear)) <= bound + 1e-15);
}

TEST_CASE("itd rear mirrors front") {
    EarConfig ear;
    ear.finalize();
    CHECK(itd_model(150.0, ear) == doctest::Approx(itd_model(30.0, ear)));
    CHECK(itd_model(90.0, ear) == doctest::Approx(max_itd(ear)));
}

TEST_CASE("ild_model: symmetry, antisymmetry and head shadow") {
    EarConfig ear;
    ear.finalize();
    for (int ch = 0; ch < ear.channels; ++ch)
        CHECK(ild_model(0.0, ear.channel_center(ch), ear) == 0.0);
    CHECK(ild_model(-60.0, 4000.0, ear) == doctest::Approx(-ild_model(60.0, 4000.0, ear)));
    CHECK(ild_model(60.0, 4000.0, ear) > ild_model(60.0, 500.0, ear));
    CHECK(ild_model(30.0, 1000.0, ear) > 0.0); // right side louder on the right
}

TEST_CASE("empty scene renders the background in every channel") {
    SimConfig cfg = default_config();
    AuditoryScene scene = empty_scene();
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
    CochleagramFrame f = render_frame(scene, reg, cfg.ear, 0.0, 0.5);
    for (int ch = 0; ch < cfg.ear.channels; ++ch) {
        CHECK(f.left_db[ch] == scene.background_db);
        CHECK(f.right_db[ch] == scene.background_db);
    }
}

TEST_CASE("dynamic range gate: a 5 dB source is bit-identical to silence") {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
    AuditoryScene silent = empty_scene();
    AuditoryScene quiet = empty_scene();
    quiet.sources.push_back(simple_source("q", "dog_bark", 20.0, 1.0, 35.0)); // bg + 5
    for (double t = 0.0; t <= 1.0; t += 0.1) {
        CochleagramFrame fs = render_frame(silent, reg, cfg.ear, 0.0, t);
        CochleagramFrame fq = render_frame(quiet, reg, cfg.ear, 0.0, t);
        CHECK(fs == fq);
    }
}

TEST_CASE("dynamic range gate: 140 dB above background clamps at +130 exactly") {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::categories_only(cfg.ear.channels);
    std::vector<double> sig(cfg.ear.channels, 0.0);
    sig[10] = 1.0; // concentrated band so the channel saturates
    reg.register_template("Mechanical/Alarms", sig, Envelope::periodic, 100.0, {}, "blast");

    AuditoryScene scene = empty_scene();
    scene.sources.push_back(simple_source("loud", "blast", 0.0, 1.0, scene.background_db + 140.0));
    CochleagramFrame f = render_frame(scene, reg, cfg.ear, 0.0, 0.5);
    CHECK(f.left_db[10] == scene.background_db + 130.0);
    CHECK(f.right_db[10] == scene.background_db + 130.0);
}

TEST_CASE("per-channel energies never leave the [bg, bg+130] window") {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
    AuditoryScene scene = empty_scene();
    scene.sources.push_back(simple_source("a", "dog_bark", -45.0, 1.0, 170.0));
    scene.sources.push_back(simple_source("b", "pump_alarm", 60.0, 0.5, 165.0));
    CochleagramFrame f = render_frame(scene, reg, cfg.ear, 0.0, 0.5);
    for (int ch = 0; ch < cfg.ear.channels; ++ch) {
        CHECK(f.left_db[ch] >= scene.background_db);
        CHECK(f.left_db[ch] <= scene.background_db + 130.0);
        CHECK(f.right_db[ch] >= scene.background_db);
        CHECK(f.right_db[ch] <= scene.background_db + 130.0);
    }
}

TEST_CASE("head-heading equivariance") {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
    for (double delta : {30.0, -75.0, 120.0}) {
        AuditoryScene scene = empty_scene();
        scene.sources.push_back(simple_source("a", "dog_bark", 40.0, 2.0, 80.0));
        scene.sources.push_back(simple_source("b", "pump_alarm", -10.0, 3.0, 75.0));
        AuditoryScene rotated = scene;
        for (SoundSource& s : rotated.sources)
            for (TrajectoryKeyframe& k : s.trajectory)
                k.azimuth_deg = wrap_deg(k.azimuth_deg + delta);
        CochleagramFrame f1 = render_frame(scene, reg, cfg.ear, 0.0, 0.5);
        CochleagramFrame f2 = render_frame(rotated, reg, cfg.ear, delta, 0.5);
        for (int ch = 0; ch < cfg.ear.channels; ++ch) {
            CHECK(f1.left_db[ch] == doctest::Approx(f2.left_db[ch]).epsilon(1e-12));
            CHECK(f1.right_db[ch] == doctest::Approx(f2.right_db[ch]).epsilon(1e-12));
        }
    }
}

TEST_CASE("rendering is deterministic") {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
    AuditoryScene scene = empty_scene();
    scene.sources.push_back(simple_source("a", "speech_female", 25.0, 2.0, 72.0));
    CochleagramFrame f1 = render_frame(scene, reg, cfg.ear, 10.0, 0.4);
    CochleagramFrame f2 = render_frame(scene, reg, cfg.ear, 10.0, 0.4);
    CHECK(f1 == f2);
}

TEST_CASE("interaural features: single and paired sources") {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);

    SUBCASE("centered source: itd 0, ild ~ 0") {
        AuditoryScene scene = empty_scene();
        scene.sources.push_back(simple_source("c", "speech_female", 0.0, 2.0, 75.0));
        InterauralFeatures ft = interaural_features(scene, reg, cfg.ear, 0.0, 0.5);
        CHECK(ft.itd_s == 0.0);
        for (int ch = 0; ch < cfg.ear.channels; ++ch)
            CHECK(std::abs(ft.ild_db[ch]) < 1e-9);
    }
    SUBCASE("source at +90: itd equals the oracle") {
        AuditoryScene scene = empty_scene();
        scene.sources.push_back(simple_source("r", "speech_female", 90.0, 2.0, 75.0));
        InterauralFeatures ft = interaural_features(scene, reg, cfg.ear, 0.0, 0.5);
        CHECK(ft.itd_s == doctest::Approx((0.0875 / 343.0) * (kPi / 2.0 + 1.0)).epsilon(1e-9));
    }
    SUBCASE("equal sources at +-30 cancel the mean itd") {
        AuditoryScene scene = empty_scene();
        scene.sources.push_back(simple_source("l", "speech_female", -30.0, 2.0, 75.0));
        scene.sources.push_back(simple_source("r", "speech_male", 30.0, 2.0, 75.0));
        InterauralFeatures ft = interaural_features(scene, reg, cfg.ear, 0.0, 0.5);
        // hand-computed weighted mean: equal weights, itd(-30) = -itd(30)
        CHECK(ft.itd_s == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("summed loudness tracks the source level") {
        AuditoryScene scene = empty_scene();
        scene.sources.push_back(simple_source("c", "speech_female", 0.0, 1.0, 90.0));
        InterauralFeatures ft = interaural_features(scene, reg, cfg.ear, 0.0, 0.5);
        // 60 above background plus the 3 dB front emphasis
        CHECK(ft.summed_loudness_db == doctest::Approx(63.0).epsilon(0.05));
    }
}

TEST_CASE("front emphasis boosts only the front sector") {
    SimConfig cfg = default_config();
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
    AuditoryScene front = empty_scene();
    front.sources.push_back(simple_source("s", "speech_female", 0.0, 1.0, 80.0));
    AuditoryScene side = empty_scene();
    side.sources.push_back(simple_source("s", "speech_female", 120.0, 1.0, 80.0));
    InterauralFeatures ff = interaural_features(front, reg, cfg.ear, 0.0, 0.5);
    InterauralFeatures fs = interaural_features(side, reg, cfg.ear, 0.0, 0.5);
    CHECK(ff.summed_loudness_db > fs.summed_loudness_db + 2.0);
}

TEST_CASE("sensitivity presets") {
    AuditoryScene scene = empty_scene();

    SUBCASE("normal preset leaves the frame untouched") {
        SimConfig cfg = default_config();
        OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
        scene.sources.push_back(simple_source("s", "bird_chirp", 0.0, 1.0, 75.0));
        CochleagramFrame f = render_frame(scene, reg, cfg.ear, 0.0, 0.5);
        CochleagramFrame g = apply_sensitivity(f, cfg.ear, scene.background_db);
        CHECK(f == g);
    }
    SUBCASE("aged preset attenuates high channels more") {
        SimConfig cfg = default_config();
        cfg.ear.sensitivity_preset = "aged";
        cfg.ear.finalize();
        for (int ch = 0; ch < cfg.ear.channels; ++ch) {
            if (cfg.ear.channel_center(ch) <= 1000.0)
                CHECK(cfg.ear.sensitivity_shift_db[ch] == 0.0);
            if (cfg.ear.channel_center(ch) > 2000.0)
                CHECK(cfg.ear.sensitivity_shift_db[ch] > 8.0);
        }
        CHECK(cfg.ear.sensitivity_shift_db.back() == doctest::Approx(30.0));
    }
    SUBCASE("damaged notch floors the channel at background") {
        SimConfig cfg = default_config();
        cfg.ear.sensitivity_preset = "damaged";
        cfg.ear.damaged_notch_channel = 10;
        cfg.ear.finalize();
        OntologyRegistry reg = OntologyRegistry::categories_only(cfg.ear.channels);
        std::vector<double> sig(cfg.ear.channels, 0.0);
        sig[10] = 1.0;
        reg.register_template("Mechanical/Alarms", sig, Envelope::periodic, 80.0, {}, "notched");
        scene.sources.push_back(simple_source("s", "notched", 0.0, 1.0, 65.0)); // bg + 35 < 40
        CochleagramFrame f = render_observation(scene, reg, cfg.ear, 0.0, 0.5, true).frame;
        CHECK(f.left_db[10] == scene.background_db);
        CHECK(f.right_db[10] == scene.background_db);
    }
}

TEST_CASE("doppler shift moves the spectral centroid the right way") {
    EarConfig ear;
    ear.finalize();
    std::vector<double> sig = band_signature(ear.channels, 15.0, 2.0);
    const double base = spectral_centroid_hz(sig, ear);
    const double up = spectral_centroid_hz(doppler_shift_signature(sig, 1.05, ear), ear);
    const double down = spectral_centroid_hz(doppler_shift_signature(sig, 0.95, ear), ear);
    CHECK(up > base);
    CHECK(down < base);
    CHECK(up / base == doctest::Approx(1.05).epsilon(0.01));
    CHECK(down / base == doctest::Approx(0.95).epsilon(0.01));
}
