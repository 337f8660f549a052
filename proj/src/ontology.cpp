#include "earsim/ontology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "earsim/error.hpp"

namespace earsim {

const char* to_string(Envelope e) {
    switch (e) {
        case Envelope::impulsive: return "impulsive";
        case Envelope::sustained: return "sustained";
        case Envelope::periodic: return "periodic";
        case Envelope::repeating: return "repeating";
    }
    return "sustained";
}

std::optional<Envelope> envelope_from_string(const std::string& s) {
    if (s == "impulsive") return Envelope::impulsive;
    if (s == "sustained") return Envelope::sustained;
    if (s == "periodic") return Envelope::periodic;
    if (s == "repeating") return Envelope::repeating;
    return std::nullopt;
}

double SoundTemplate::centroid_hz(const EarConfig& ear) const {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < spectral_signature.size(); ++i) {
        num += spectral_signature[i] * ear.channel_center(static_cast<int>(i));
        den += spectral_signature[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

std::vector<double> band_signature(int channels, double center_channel, double width_channels) {
    std::vector<double> sig(static_cast<size_t>(channels), 0.0);
    const double w = std::max(width_channels, 1e-3);
    double sum = 0.0;
    for (int i = 0; i < channels; ++i) {
        const double d = (i - center_channel) / w;
        sig[static_cast<size_t>(i)] = std::exp(-0.5 * d * d);
        sum += sig[static_cast<size_t>(i)];
    }
    for (double& v : sig) v /= sum;
    return sig;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

OntologyRegistry::OntologyRegistry(int channels) : channels_(channels) {
    SoundCategory unknown;
    unknown.path = {"Miscellaneous", "Unknown"};
    unknown.id = unknown_category_id;
    categories_.emplace(unknown.id, std::move(unknown));
}

void OntologyRegistry::add_category(SoundCategory category) {
    if (category.path.empty())
        throw EarError(ErrorCode::invalid_argument, "category path must be non-empty");
    static const std::vector<std::string> roots = {"Natural", "HumanMade", "Mechanical",
                                                   "Miscellaneous"};
    if (std::find(roots.begin(), roots.end(), category.path.front()) == roots.end())
        throw EarError(ErrorCode::invalid_argument,
                       "category root must be Natural/HumanMade/Mechanical/Miscellaneous");
    if (category.id.empty()) {
        category.id = category.path.front();
        for (size_t i = 1; i < category.path.size(); ++i) category.id += "/" + category.path[i];
    }
    auto it = categories_.find(category.id);
    if (it != categories_.end()) {
        it->second = std::move(category); // replace definition, ids stay unique
        return;
    }
    categories_.emplace(category.id, std::move(category));
}

std::string OntologyRegistry::register_template(const std::string& category_id,
                                                std::vector<double> signature,
                                                Envelope envelope,
                                                double nominal_level_db,
                                                std::map<std::string, std::string> modifiers,
                                                const std::string& id_hint) {
    if (!has_category(category_id))
        throw EarError(ErrorCode::unknown_category, "unknown category: " + category_id);
    if (static_cast<int>(signature.size()) != channels_)
        throw EarError(ErrorCode::malformed_signature,
                       "signature length " + std::to_string(signature.size()) + " != channels " +
                           std::to_string(channels_));
    double sum = 0.0;
    for (double v : signature) {
        if (!(v >= 0.0))
            throw EarError(ErrorCode::malformed_signature, "signature entries must be >= 0");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw EarError(ErrorCode::malformed_signature,
                       "signature must sum to 1 (got " + std::to_string(sum) + ")");
    if (!std::isfinite(nominal_level_db))
        throw EarError(ErrorCode::invalid_argument, "nominal level must be finite");

    std::string id = id_hint;
    if (id.empty()) {
        do {
            id = "tpl_" + std::to_string(next_template_serial_++);
        } while (templates_.count(id));
    } else if (templates_.count(id)) {
        throw EarError(ErrorCode::invalid_argument, "duplicate template id: " + id);
    }

    SoundTemplate t;
    t.id = id;
    t.category = category_id;
    t.spectral_signature = std::move(signature);
    t.envelope = envelope;
    t.nominal_level_db = nominal_level_db;
    t.modifiers = std::move(modifiers);
    templates_.emplace(id, std::move(t));
    return id;
}

const SoundCategory* OntologyRegistry::category(const std::string& id) const {
    auto it = categories_.find(id);
    return it == categories_.end() ? nullptr : &it->second;
}

const SoundTemplate* OntologyRegistry::sound_template(const std::string& id) const {
    auto it = templates_.find(id);
    return it == templates_.end() ? nullptr : &it->second;
}

bool OntologyRegistry::is_speech_category(const std::string& category_id) const {
    return category_id == "HumanMade/Speech" || category_id.starts_with("HumanMade/Speech/");
}

Classification OntologyRegistry::classify(std::span<const double> signature,
                                          Envelope envelope) const {
    Classification best;
    best.category = unknown_category_id;
    best.confidence = 0.0;
    double best_score = -1.0;
    std::string best_id;
    for (const auto& [id, t] : templates_) { // map order: smallest id wins ties
        double score = cosine_similarity(signature, t.spectral_signature);
        if (t.envelope != envelope) score *= 0.8;
        if (score > best_score + 1e-12) {
            best_score = score;
            best_id = id;
        }
    }
    if (best_id.empty() || best_score < match_threshold_) return best;
    const SoundTemplate& t = templates_.at(best_id);
    best.category = t.category;
    best.confidence = std::clamp(best_score, 0.0, 1.0);
    best.template_id = best_id;
    return best;
}

namespace {

struct BuiltinRow {
    const char* root;
    const char* mid; // may be null
    const char* leaf;
    std::vector<const char*> slots;
};

const std::vector<BuiltinRow>& builtin_rows() {
    static const std::vector<BuiltinRow> rows = {
        {"Natural", "Mammals", "Dog", {"type of sound"}},
        {"Natural", "Mammals", "Horse", {}},
        {"Natural", nullptr, "Birds", {"type", "action"}},
        {"Natural", nullptr, "Insects", {"type"}},
        {"Natural", nullptr, "LeavesWind", {}},
        {"Natural", nullptr, "Fluid", {"kind"}},
        {"Natural", nullptr, "Water", {}},
        {"Natural", nullptr, "Fire", {"weather"}},
        {"Natural", nullptr, "Rocks", {}},
        {"HumanMade", nullptr, "Speech", {"speaker", "volume", "gender", "emotional tone", "words"}},
        {"HumanMade", nullptr, "Singing", {}},
        {"HumanMade", nullptr, "Whistling", {}},
        {"HumanMade", nullptr, "RetchingSpitting", {}},
        {"HumanMade", nullptr, "Vocalizations", {}}, // gasping, yelling, whimpering, moaning
        {"HumanMade", nullptr, "Breathing", {}},     // blowing nose, sneezing, coughing
        {"HumanMade", nullptr, "Footsteps", {"terrain"}},
        {"HumanMade", nullptr, "GettingHit", {"implement"}},
        {"HumanMade", nullptr, "Heartbeat", {}},
        {"Mechanical", nullptr, "Alarms", {}},
        {"Mechanical", nullptr, "Tapping", {"pace", "material"}},
        {"Mechanical", nullptr, "Clicks", {}},
        {"Mechanical", nullptr, "Creaking", {"object"}},
        {"Mechanical", nullptr, "Dragging", {}},
        {"Mechanical", nullptr, "Gunfire", {"distance", "caliber", "rate of fire", "direction"}},
        {"Mechanical", nullptr, "Grenade", {}},
        {"Mechanical", nullptr, "GearRustling", {}},
        {"Mechanical", nullptr, "MagazineChanges", {}},
        {"Mechanical", nullptr, "Vehicles", {"speed", "direction", "distance", "horn", "type of vehicle"}},
        {"Mechanical", nullptr, "Explosions", {"size", "distance", "direction"}},
        {"Miscellaneous", nullptr, "Sha", {}}, // literal row, semantics unspecified
        {"Miscellaneous", nullptr, "Music", {}},
    };
    return rows;
}

} // namespace

OntologyRegistry OntologyRegistry::categories_only(int channels) {
    OntologyRegistry r(channels);
    for (const BuiltinRow& row : builtin_rows()) {
        SoundCategory c;
        c.path.push_back(row.root);
        if (row.mid) c.path.push_back(row.mid);
        c.path.push_back(row.leaf);
        for (const char* s : row.slots) c.feature_slots.push_back(s);
        r.add_category(std::move(c));
    }
    return r;
}

OntologyRegistry OntologyRegistry::builtin(int channels) {
    OntologyRegistry r = categories_only(channels);
    const int n = channels;
    const double scale = (n - 1) / 31.0; // placements are tuned on the 32-channel grid
    auto band = [&](double center, double width = 1.1) {
        return band_signature(n, center * scale, width * std::max(scale, 1.0));
    };
    // Standard template set used by the bundled scenes. Bands sit on a
    // separated grid so different categories stay distinguishable by cosine;
    // the three speech voices intentionally share a block.
    r.register_template("Mechanical/Vehicles", band(1.5), Envelope::sustained, 75.0,
                        {{"type of vehicle", "truck"}}, "truck_idle");
    r.register_template("Mechanical/Gunfire", band(4.5), Envelope::impulsive, 110.0,
                        {{"caliber", "rifle"}}, "gunshot");
    r.register_template("HumanMade/Footsteps", band(7.5), Envelope::repeating, 55.0,
                        {{"terrain", "grass"}}, "footsteps_grass");
    r.register_template("Natural/Mammals/Dog", band(10.5), Envelope::impulsive, 80.0,
                        {{"type of sound", "bark"}}, "dog_bark");
    r.register_template("HumanMade/Speech", band(13.5), Envelope::sustained, 65.0, {},
                        "speech_male");
    r.register_template("HumanMade/Speech", band(14.5), Envelope::sustained, 65.0, {},
                        "speech_generic");
    r.register_template("HumanMade/Speech", band(15.5), Envelope::sustained, 65.0, {},
                        "speech_female");
    r.register_template("Natural/Birds", band(17.5), Envelope::repeating, 60.0,
                        {{"type", "songbird"}, {"action", "call"}}, "bird_chirp");
    r.register_template("Miscellaneous/Music", band(19.5), Envelope::sustained, 65.0, {},
                        "music_radio");
    r.register_template("Natural/LeavesWind", band(22.5), Envelope::sustained, 50.0, {},
                        "leaves_rustle");
    r.register_template("Mechanical/Vehicles", band(25.5), Envelope::periodic, 85.0,
                        {{"type of vehicle", "siren"}}, "siren_wail");
    r.register_template("Mechanical/Alarms", band(28.5), Envelope::periodic, 85.0, {},
                        "pump_alarm");
    r.register_template("Mechanical/Alarms", band(31.0), Envelope::periodic, 90.0, {},
                        "fire_alarm");
    return r;
}

nlohmann::json OntologyRegistry::to_json() const {
    nlohmann::json j;
    j["channels"] = channels_;
    j["categories"] = nlohmann::json::array();
    for (const auto& [id, c] : categories_) {
        j["categories"].push_back({
            {"id", c.id},
            {"path", c.path},
            {"feature_slots", c.feature_slots},
        });
    }
    j["templates"] = nlohmann::json::array();
    for (const auto& [id, t] : templates_) {
        j["templates"].push_back({
            {"id", t.id},
            {"category", t.category},
            {"signature", t.spectral_signature},
            {"envelope", to_string(t.envelope)},
            {"nominal_level_db", t.nominal_level_db},
            {"modifiers", t.modifiers},
        });
    }
    return j;
}

void OntologyRegistry::merge_json(const nlohmann::json& j) {
    try {
        if (j.contains("categories")) {
            for (const auto& cj : j.at("categories")) {
                SoundCategory c;
                c.path = cj.at("path").get<std::vector<std::string>>();
                if (cj.contains("id")) c.id = cj.at("id").get<std::string>();
                if (cj.contains("feature_slots"))
                    c.feature_slots = cj.at("feature_slots").get<std::vector<std::string>>();
                if (c.id == unknown_category_id) continue; // reserved, never replaced
                add_category(std::move(c));
            }
        }
        if (j.contains("templates")) {
            for (const auto& tj : j.at("templates")) {
                auto env = envelope_from_string(tj.value("envelope", "sustained"));
                if (!env)
                    throw EarError(ErrorCode::parse_error,
                                   "bad envelope in template " + tj.value("id", "?"));
                std::map<std::string, std::string> mods;
                if (tj.contains("modifiers"))
                    mods = tj.at("modifiers").get<std::map<std::string, std::string>>();
                register_template(tj.at("category").get<std::string>(),
                                  tj.at("signature").get<std::vector<double>>(), *env,
                                  tj.at("nominal_level_db").get<double>(), std::move(mods),
                                  tj.value("id", ""));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw EarError(ErrorCode::parse_error, "ontology document: " + std::string(e.what()));
    }
}

OntologyRegistry OntologyRegistry::from_json(const nlohmann::json& j, int channels) {
    OntologyRegistry r(channels);
    r.merge_json(j);
    return r;
}

void OntologyRegistry::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EarError(ErrorCode::io_error, "cannot open ontology file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw EarError(ErrorCode::parse_error, "ontology parse error: " + std::string(e.what()));
    }
    merge_json(j);
}

} // namespace earsim
