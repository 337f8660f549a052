#include <doctest.h>

#include <cmath>
#include <random>

#include "earsim/localization.hpp"
#include "helpers.hpp"

using namespace earsim;
using namespace earsim::test;

namespace {

InterauralFeatures features_for(double azimuth_deg, const EarConfig& ear) {
    InterauralFeatures f;
    f.itd_s = itd_model(azimuth_deg, ear);
    f.ild_db.assign(static_cast<size_t>(ear.channels), 0.0);
    f.summed_loudness_db = 40.0;
    return f;
}

// Front-hemisphere image of a world azimuth (cone of confusion).
double folded(double az) {
    const double w = wrap_deg(az);
    if (std::abs(w) <= 90.0) return w;
    return w >= 0.0 ? 180.0 - w : -180.0 - w;
}

} // namespace

TEST_CASE("sector_sigma: anchors and interpolation") {
    LocalizationConfig cfg;
    CHECK(sector_sigma(0.0, cfg) == 2.0);
    CHECK(sector_sigma(30.0, cfg) == 2.0);
    CHECK(sector_sigma(120.0, cfg) == 20.0);
    CHECK(sector_sigma(90.0, cfg) == 20.0);
    CHECK(sector_sigma(60.0, cfg) == doctest::Approx(11.0)); // declared midpoint
    // monotone in |azimuth|
    double prev = 0.0;
    for (double a = 0.0; a <= 180.0; a += 1.0) {
        const double s = sector_sigma(a, cfg);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("noise-free inversion recovers the forward model within 0.5 deg") {
    SimConfig cfg = default_config();
    std::mt19937_64 rng(1);
    for (double az = -85.0; az <= 85.0; az += 0.5) {
        InterauralFeatures f = features_for(az, cfg.ear);
        LocalizationEstimate est = localize(f, cfg.ear, cfg.localization, /*super_ear=*/true, rng);
        CHECK(std::abs(est.azimuth_deg - az) < 0.5);
        CHECK_FALSE(est.front_back_resolved);
    }
}

TEST_CASE("itd of +90 degrees inverts to +90") {
    SimConfig cfg = default_config();
    std::mt19937_64 rng(1);
    InterauralFeatures f;
    f.itd_s = 6.56e-4; // near the physical bound
    f.ild_db.assign(32, 0.0);
    LocalizationEstimate est = localize(f, cfg.ear, cfg.localization, true, rng);
    CHECK(est.azimuth_deg == doctest::Approx(90.0).epsilon(0.01));
}

TEST_CASE("itd beyond the physical bound clamps and reports sector-max sigma") {
    SimConfig cfg = default_config();
    std::mt19937_64 rng(1);
    InterauralFeatures f;
    f.itd_s = -1.0e-3;
    f.ild_db.assign(32, 0.0);
    LocalizationEstimate est = localize(f, cfg.ear, cfg.localization, true, rng);
    CHECK(est.azimuth_deg == doctest::Approx(-90.0));
    CHECK(est.azimuth_sigma_deg == cfg.localization.sigma_side_deg);
}

TEST_CASE("seeded noise matches the configured sigma within 20 percent") {
    SimConfig cfg = default_config();
    std::mt19937_64 rng(12345);
    double sum2 = 0.0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        InterauralFeatures f = features_for(0.0, cfg.ear);
        LocalizationEstimate est = localize(f, cfg.ear, cfg.localization, false, rng);
        sum2 += est.azimuth_deg * est.azimuth_deg;
    }
    const double sample_sigma = std::sqrt(sum2 / n);
    CHECK(sample_sigma > 0.8 * cfg.localization.sigma_front_deg);
    CHECK(sample_sigma < 1.2 * cfg.localization.sigma_front_deg);
}

TEST_CASE("determinism under a fixed seed") {
    SimConfig cfg = default_config();
    InterauralFeatures f = features_for(40.0, cfg.ear);
    std::mt19937_64 a(99), b(99);
    LocalizationEstimate e1 = localize(f, cfg.ear, cfg.localization, false, a);
    LocalizationEstimate e2 = localize(f, cfg.ear, cfg.localization, false, b);
    CHECK(e1.azimuth_deg == e2.azimuth_deg);
    CHECK(e1.azimuth_sigma_deg == e2.azimuth_sigma_deg);
}

TEST_CASE("resolve_front_back: simulation oracle under both hypotheses") {
    SUBCASE("rear source mirrors") {
        // source truly at +150; head turns +20; folded estimates simulated
        // through the forward model
        std::vector<HeadingObservation> hist = {
            {0.0, folded(150.0 - 0.0)},
            {20.0, folded(150.0 - 20.0)},
        };
        auto res = resolve_front_back(hist);
        REQUIRE(res.has_value());
        CHECK(res->rear);
        CHECK(res->world_azimuth_deg == doctest::Approx(150.0).epsilon(1e-9));
    }
    SUBCASE("front source resolves front") {
        std::vector<HeadingObservation> hist;
        for (double h : {-10.0, 0.0, 10.0}) hist.push_back({h, folded(0.0 - h)});
        auto res = resolve_front_back(hist);
        REQUIRE(res.has_value());
        CHECK_FALSE(res->rear);
        CHECK(std::abs(res->world_azimuth_deg) < 1e-9);
    }
    SUBCASE("no head motion stays unresolved") {
        std::vector<HeadingObservation> hist = {{0.0, 30.0}, {0.0, 30.0}, {0.0, 30.0}};
        CHECK_FALSE(resolve_front_back(hist).has_value());
    }
    SUBCASE("random world azimuths resolve correctly") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-179.0, 179.0);
        for (int trial = 0; trial < 200; ++trial) {
            const double truth = u(rng);
            if (std::abs(std::abs(truth) - 90.0) < 3.0) continue; // degenerate at the axis
            const double turn = u(rng) / 8.0;
            if (std::abs(turn) < 6.0) continue;
            std::vector<HeadingObservation> hist = {
                {0.0, folded(truth)},
                {turn, folded(truth - turn)},
            };
            auto res = resolve_front_back(hist);
            REQUIRE(res.has_value());
            CHECK(std::abs(wrap_deg(res->world_azimuth_deg - truth)) < 1.0);
        }
    }
}

TEST_CASE("distance estimate inverts the attenuation law") {
    auto [d1, c1] = distance_estimate(80.0 - 20.0 * std::log10(2.0), 80.0);
    REQUIRE(d1.has_value());
    CHECK(*d1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c1 == DistanceConfidence::coarse);

    auto [d2, c2] = distance_estimate(80.0, 80.0);
    REQUIRE(d2.has_value());
    CHECK(*d2 == doctest::Approx(1.0));

    auto [d3, c3] = distance_estimate(73.0, std::nullopt);
    CHECK_FALSE(d3.has_value());
    CHECK(c3 == DistanceConfidence::unknown);

    // exact composition with the scene's attenuation model
    for (double dist : {0.7, 1.0, 3.3, 12.0}) {
        auto [d, c] = distance_estimate(75.0 - 20.0 * std::log10(dist), 75.0);
        REQUIRE(d.has_value());
        CHECK(*d == doctest::Approx(dist).epsilon(1e-12));
    }
}
