#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "earsim/config.hpp"

namespace earsim {

// A node of the sound taxonomy. The id is the path joined with '/'.
struct SoundCategory {
    std::string id;
    std::vector<std::string> path; // first element: Natural | HumanMade | Mechanical | Miscellaneous
    std::vector<std::string> feature_slots;
};

enum class Envelope { impulsive, sustained, periodic, repeating };

const char* to_string(Envelope e);
std::optional<Envelope> envelope_from_string(const std::string& s);

// A matchable sound: a normalized spectral shape plus coarse temporal
// behaviour and a reference level at 1 m.
struct SoundTemplate {
    std::string id;
    std::string category;
    std::vector<double> spectral_signature; // >= 0, sums to 1
    Envelope envelope = Envelope::sustained;
    double nominal_level_db = 70.0;
    std::map<std::string, std::string> modifiers;

    double centroid_hz(const EarConfig& ear) const;
};

struct Classification {
    std::string category;   // Unknown when no template clears the threshold
    double confidence = 0.0;
    std::string template_id; // empty for Unknown
};

class OntologyRegistry {
public:
    explicit OntologyRegistry(int channels);

    // Categories from the builtin taxonomy plus a standard template set.
    static OntologyRegistry builtin(int channels);
    // Builtin taxonomy only, no templates.
    static OntologyRegistry categories_only(int channels);

    static constexpr const char* unknown_category_id = "Miscellaneous/Unknown";

    void add_category(SoundCategory category);

    // Returns the template id; throws EarError(unknown_category |
    // malformed_signature | invalid_argument).
    std::string register_template(const std::string& category_id,
                                  std::vector<double> signature,
                                  Envelope envelope,
                                  double nominal_level_db,
                                  std::map<std::string, std::string> modifiers = {},
                                  const std::string& id_hint = "");

    const SoundCategory* category(const std::string& id) const;
    const SoundTemplate* sound_template(const std::string& id) const;
    bool has_category(const std::string& id) const { return category(id) != nullptr; }

    bool is_speech_category(const std::string& category_id) const;

    // Best cosine match over the registry, scaled by envelope agreement
    // (x1.0 match, x0.8 mismatch). Below the match threshold -> Unknown
    // with confidence 0. Ties break on the smaller template id.
    Classification classify(std::span<const double> signature, Envelope envelope) const;

    void set_match_threshold(double t) { match_threshold_ = t; }
    double match_threshold() const { return match_threshold_; }

    int channels() const { return channels_; }
    size_t template_count() const { return templates_.size(); }
    const std::map<std::string, SoundCategory>& categories() const { return categories_; }
    const std::map<std::string, SoundTemplate>& templates() const { return templates_; }

    // Same document family as the scene format, so sounds can be added
    // without recompiling.
    nlohmann::json to_json() const;
    static OntologyRegistry from_json(const nlohmann::json& j, int channels);
    void merge_json(const nlohmann::json& j); // adds categories/templates
    void merge_file(const std::string& path);

private:
    int channels_;
    double match_threshold_ = 0.75;
    std::map<std::string, SoundCategory> categories_;
    std::map<std::string, SoundTemplate> templates_;
    int next_template_serial_ = 1;
};

// Normalized Gaussian bump over channel indices; the workhorse for
// synthetic template signatures.
std::vector<double> band_signature(int channels, double center_channel, double width_channels);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

} // namespace earsim
