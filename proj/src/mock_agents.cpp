#include "earsim/harness.hpp"

#include "earsim/error.hpp"

namespace earsim {

namespace {

// Focuses one speaker, switches attention when the agent's name arrives from
// the other stream, then returns to the original speaker.
class NameListener : public MockAgent {
public:
    explicit NameListener(const nlohmann::json& args) {
        focus_sign_ = args.value("focus_azimuth_sign", -1);
        refocus_after_ = args.value("refocus_after_matches", 2);
        name_ = args.value("name", std::string("HAL"));
    }

    void on_start(Io& io) override { io.send("SUBSCRIBE", nlohmann::json::object()); }

    void on_event(const EventMessage& e, Io& io) override {
        if (e.kind == EventKind::INTERRUPT && e.matched_entry && *e.matched_entry == name_ &&
            e.heard && !interrupted_) {
            interrupted_ = true;
            interrupt_stream_ = e.heard->stream_id;
            io.send("FOCUS", {{"stream_id", e.heard->stream_id}});
            return;
        }
        if (e.kind != EventKind::SOUND || !e.heard) return;
        if (!focused_initial_ && e.heard->speech &&
            e.heard->azimuth_deg * focus_sign_ > 0.0) {
            focused_initial_ = true;
            io.send("FOCUS", {{"stream_id", e.heard->stream_id}});
            return;
        }
        if (interrupted_ && !refocused_ && e.heard->stream_id == interrupt_stream_ &&
            e.heard->speech) {
            bool content_word = false;
            for (const auto& [w, t] : e.heard->speech->words)
                if (w != name_) content_word = true;
            if (content_word && ++matches_since_switch_ >= refocus_after_) {
                refocused_ = true;
                io.send("REFOCUS", nlohmann::json::object());
            }
        }
    }

private:
    int focus_sign_ = -1;
    int refocus_after_ = 2;
    std::string name_;
    bool focused_initial_ = false;
    bool interrupted_ = false;
    bool refocused_ = false;
    int matches_since_switch_ = 0;
    int64_t interrupt_stream_ = 0;
};

// Loads a long-term target and idles; the FOUND arrives on its own.
class VigilanceOperator : public MockAgent {
public:
    explicit VigilanceOperator(const nlohmann::json& args) {
        pattern_ = args.value("pattern", std::string("Natural/Mammals/Dog"));
    }
    void on_start(Io& io) override { io.send("VIGILANCE", {{"pattern", pattern_}}); }
    void on_event(const EventMessage&, Io&) override {}

private:
    std::string pattern_;
};

// Turns the head towards the first reported sound.
class HeadTurner : public MockAgent {
public:
    explicit HeadTurner(const nlohmann::json&) {}
    void on_start(Io& io) override { io.send("SUBSCRIBE", nlohmann::json::object()); }
    void on_event(const EventMessage& e, Io& io) override {
        if (turned_ || e.kind != EventKind::SOUND || !e.heard) return;
        turned_ = true;
        // reported azimuth is head-relative; we track our own heading
        const double target = wrap_deg(heading_ + e.heard->azimuth_deg);
        heading_ = target;
        io.send("TURN_HEAD", {{"mode", "absolute"}, {"deg", target}});
    }

private:
    bool turned_ = false;
    double heading_ = 0.0;
};

} // namespace

std::unique_ptr<MockAgent> make_mock_agent(const std::string& role, const nlohmann::json& args) {
    if (role == "name_listener") return std::make_unique<NameListener>(args);
    if (role == "vigilance_operator") return std::make_unique<VigilanceOperator>(args);
    if (role == "head_turner") return std::make_unique<HeadTurner>(args);
    throw EarError(ErrorCode::invalid_argument, "unknown mock agent role: " + role);
}

} // namespace earsim
