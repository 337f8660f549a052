#include <doctest.h>

#include <random>

#include "earsim/error.hpp"
#include "earsim/ontology.hpp"

using namespace earsim;

namespace {
constexpr int kChannels = 32;

// Brute-force similarity, independent of the registry's matching path.
double brute_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}
} // namespace

TEST_CASE("builtin ontology carries the full taxonomy") {
    OntologyRegistry r = OntologyRegistry::builtin(kChannels);

    const SoundCategory* dog = r.category("Natural/Mammals/Dog");
    REQUIRE(dog != nullptr);
    CHECK(dog->path == std::vector<std::string>{"Natural", "Mammals", "Dog"});
    REQUIRE(!dog->feature_slots.empty());
    CHECK(dog->feature_slots.front() == "type of sound");

    const SoundCategory* gunfire = r.category("Mechanical/Gunfire");
    REQUIRE(gunfire != nullptr);
    for (const char* slot : {"distance", "caliber", "rate of fire", "direction"})
        CHECK(std::find(gunfire->feature_slots.begin(), gunfire->feature_slots.end(), slot) !=
              gunfire->feature_slots.end());

    CHECK(r.category(OntologyRegistry::unknown_category_id) != nullptr);
    CHECK(r.category("Natural/Mammals/Horse") != nullptr);
    CHECK(r.category("Natural/Birds") != nullptr);
    CHECK(r.category("HumanMade/Speech") != nullptr);
    CHECK(r.category("HumanMade/Footsteps") != nullptr);
    CHECK(r.category("Mechanical/Alarms") != nullptr);
    CHECK(r.category("Mechanical/Vehicles") != nullptr);
    CHECK(r.category("Miscellaneous/Music") != nullptr);
    CHECK(r.category("Miscellaneous/Sha") != nullptr);
}

TEST_CASE("register_template round trip and validation") {
    OntologyRegistry r = OntologyRegistry::categories_only(kChannels);
    auto sig = band_signature(kChannels, 10.0, 2.0);

    const std::string id = r.register_template("Natural/Mammals/Dog", sig, Envelope::impulsive,
                                               80.0, {{"type of sound", "bark"}});
    const SoundTemplate* t = r.sound_template(id);
    REQUIRE(t != nullptr);
    CHECK(t->category == "Natural/Mammals/Dog");
    CHECK(t->envelope == Envelope::impulsive);
    CHECK(t->nominal_level_db == 80.0);
    CHECK(t->modifiers.at("type of sound") == "bark");
    CHECK(t->spectral_signature == sig);

    CHECK_THROWS_AS(
        r.register_template("Natural/Unicorns", sig, Envelope::impulsive, 80.0, {}),
        EarError);
    try {
        r.register_template("Natural/Unicorns", sig, Envelope::impulsive, 80.0, {});
    } catch (const EarError& e) {
        CHECK(e.code() == ErrorCode::unknown_category);
    }

    auto half = sig;
    for (double& v : half) v *= 0.5;
    try {
        r.register_template("Natural/Mammals/Dog", half, Envelope::impulsive, 80.0, {});
        FAIL("expected malformed_signature");
    } catch (const EarError& e) {
        CHECK(e.code() == ErrorCode::malformed_signature);
    }

    auto short_sig = std::vector<double>(kChannels - 1, 1.0 / (kChannels - 1));
    CHECK_THROWS_AS(
        r.register_template("Natural/Mammals/Dog", short_sig, Envelope::impulsive, 80.0, {}),
        EarError);
}

TEST_CASE("classify: self match wins with near-1 confidence") {
    OntologyRegistry r = OntologyRegistry::builtin(kChannels);
    for (const auto& [id, t] : r.templates()) {
        Classification c = r.classify(t.spectral_signature, t.envelope);
        CHECK(c.category == t.category);
        CHECK(c.confidence >= 0.99);
    }
}

TEST_CASE("classify: white noise lands on Unknown") {
    OntologyRegistry r = OntologyRegistry::categories_only(kChannels);
    r.register_template("Natural/Mammals/Dog", band_signature(kChannels, 6.0, 1.0),
                        Envelope::impulsive, 80.0, {}, "narrow_a");
    r.register_template("Mechanical/Alarms", band_signature(kChannels, 26.0, 1.0),
                        Envelope::periodic, 85.0, {}, "narrow_b");

    std::vector<double> noise(kChannels, 1.0 / kChannels);

    // oracle: every template similarity must itself be below the threshold
    for (const auto& [id, t] : r.templates()) {
        CHECK(brute_cosine(noise, t.spectral_signature) < r.match_threshold());
    }
    Classification c = r.classify(noise, Envelope::sustained);
    CHECK(c.category == OntologyRegistry::unknown_category_id);
    CHECK(c.confidence == 0.0);
}

TEST_CASE("classify: balanced mixture of disjoint templates resolves by tie-break") {
    OntologyRegistry r = OntologyRegistry::categories_only(kChannels);
    // perfectly disjoint two-channel signatures
    std::vector<double> a(kChannels, 0.0), b(kChannels, 0.0);
    a[4] = a[5] = 0.5;
    b[24] = b[25] = 0.5;
    r.register_template("Natural/Mammals/Dog", a, Envelope::sustained, 80.0, {}, "tpl_a");
    r.register_template("Mechanical/Alarms", b, Envelope::sustained, 85.0, {}, "tpl_b");

    std::vector<double> mix(kChannels, 0.0);
    for (int i = 0; i < kChannels; ++i) mix[i] = 0.5 * a[i] + 0.5 * b[i];

    // oracle: similarities are equal by construction, at cos = 1/sqrt(2)
    CHECK(brute_cosine(mix, a) == doctest::Approx(brute_cosine(mix, b)));
    CHECK(brute_cosine(mix, a) == doctest::Approx(1.0 / std::sqrt(2.0)));

    // an even two-way mixture sits below the default threshold -> Unknown
    Classification strict = r.classify(mix, Envelope::sustained);
    CHECK(strict.category == OntologyRegistry::unknown_category_id);

    // with the threshold relaxed the tie-break picks the smaller id
    r.set_match_threshold(0.65);
    Classification c = r.classify(mix, Envelope::sustained);
    CHECK(c.template_id == "tpl_a"); // lexicographically smallest id
    CHECK(c.category == "Natural/Mammals/Dog");
    CHECK(c.confidence < 0.99);
    CHECK(c.confidence >= r.match_threshold());
}

TEST_CASE("classify: deterministic and total on random well-formed input") {
    OntologyRegistry r = OntologyRegistry::builtin(kChannels);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> sig(kChannels);
        double sum = 0;
        for (double& v : sig) {
            v = u(rng);
            sum += v;
        }
        for (double& v : sig) v /= sum;
        Classification c1 = r.classify(sig, Envelope::sustained);
        Classification c2 = r.classify(sig, Envelope::sustained);
        CHECK(c1.category == c2.category);
        CHECK(c1.confidence == c2.confidence);
        CHECK(!c1.category.empty()); // worst case Unknown, never an error
    }
}

TEST_CASE("envelope mismatch scales the score") {
    OntologyRegistry r = OntologyRegistry::categories_only(kChannels);
    auto sig = band_signature(kChannels, 16.0, 2.0);
    r.register_template("Mechanical/Alarms", sig, Envelope::periodic, 85.0, {}, "alarm_x");
    Classification match = r.classify(sig, Envelope::periodic);
    Classification mismatch = r.classify(sig, Envelope::impulsive);
    CHECK(match.confidence == doctest::Approx(1.0));
    CHECK(mismatch.confidence == doctest::Approx(0.8));
}

TEST_CASE("ontology document round trip") {
    OntologyRegistry r = OntologyRegistry::builtin(kChannels);
    nlohmann::json doc = r.to_json();
    OntologyRegistry r2 = OntologyRegistry::from_json(doc, kChannels);
    CHECK(r2.categories().size() == r.categories().size());
    CHECK(r2.template_count() == r.template_count());
    for (const auto& [id, t] : r.templates()) {
        const SoundTemplate* t2 = r2.sound_template(id);
        REQUIRE(t2 != nullptr);
        CHECK(t2->category == t.category);
        CHECK(t2->spectral_signature == t.spectral_signature);
        CHECK(t2->envelope == t.envelope);
        CHECK(t2->modifiers == t.modifiers);
    }
}
