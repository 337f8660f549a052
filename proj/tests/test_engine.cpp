#include <doctest.h>

#include "earsim/engine.hpp"
#include "helpers.hpp"

using namespace earsim;
using namespace earsim::test;

namespace {

AuditoryScene barking_scene() {
    // bark ends at 2.0; the scene runs on so the track expires before the end
    AuditoryScene scene = empty_scene(4.0);
    scene.sources.push_back(simple_source("dog", "dog_bark", 30.0, 2.0, 80.0, 0.5, 1.5));
    return scene;
}

Engine make_engine(AuditoryScene scene, uint64_t seed = 77, bool super_ear = false) {
    SimConfig cfg = default_config();
    cfg.super_ear = super_ear;
    cfg.attention.agent_name = "HAL";
    OntologyRegistry reg = OntologyRegistry::builtin(cfg.ear.channels);
    return Engine(std::move(scene), std::move(reg), cfg, seed);
}

} // namespace

TEST_CASE("engine reports a barking dog through the whole pipeline") {
    Engine engine = make_engine(barking_scene(), 77, true);
    CommandMessage sub;
    sub.seq = 1;
    sub.cmd = Command::SUBSCRIBE;
    CHECK(engine.handle_command(0, sub, 0.0).ok());

    CommandMessage listen;
    listen.seq = 2;
    listen.cmd = Command::LISTEN_PRIMARY;
    listen.args = {{"pattern", "Natural/Mammals/Dog"}};
    CHECK(engine.handle_command(0, listen, 0.0).ok());

    engine.run_all();

    bool found = false, sound = false;
    for (const EventMessage& e : engine.event_log()) {
        if (e.kind == EventKind::FOUND && e.matched_entry == "Natural/Mammals/Dog") {
            found = true;
            REQUIRE(e.heard.has_value());
            CHECK(e.heard->category_id == "Natural/Mammals/Dog");
        }
        if (e.kind == EventKind::SOUND) {
            sound = true;
            REQUIRE(e.heard.has_value());
            CHECK(std::abs(e.heard->azimuth_deg - 30.0) < 10.0);
        }
    }
    CHECK(found);
    CHECK(sound);

    // CURRENT_SOUND after the bark ended: silence again
    CommandMessage cur;
    cur.seq = 3;
    cur.cmd = Command::CURRENT_SOUND;
    AckMessage ack = engine.handle_command(0, cur, engine.now());
    CHECK(ack.ok());
    CHECK(ack.payload.is_null());
}

TEST_CASE("event ids unique, timestamps non-decreasing") {
    Engine engine = make_engine(barking_scene());
    engine.run_all();
    const auto& log = engine.event_log();
    REQUIRE(!log.empty());
    double prev_t = -1.0;
    std::set<int64_t> ids;
    for (const EventMessage& e : log) {
        CHECK(e.t >= prev_t);
        prev_t = e.t;
        CHECK(ids.insert(e.event_id).second);
    }
}

TEST_CASE("ack strictly precedes the triggered event") {
    Engine engine = make_engine(empty_scene(2.0));
    CommandMessage turn;
    turn.seq = 1;
    turn.cmd = Command::TURN_HEAD;
    turn.args = {{"mode", "relative"}, {"deg", 90.0}};
    const double ack_t = 0.1;
    AckMessage ack = engine.handle_command(0, turn, ack_t);
    REQUIRE(ack.ok());
    CHECK(ack.payload.at("eta_s").get<double>() == doctest::Approx(0.45));
    engine.run_all();
    bool done = false;
    for (const EventMessage& e : engine.event_log()) {
        if (e.kind == EventKind::HEAD_DONE) {
            done = true;
            CHECK(e.t > ack_t);
            CHECK(e.t == doctest::Approx(0.55)); // 0.1 + 0.45
        }
    }
    CHECK(done);
    CHECK(engine.head_heading() == doctest::Approx(90.0));
}

TEST_CASE("turn preemption: one DONE for the second, one CANCELLED for the first") {
    Engine engine = make_engine(empty_scene(2.0));
    CommandMessage t1;
    t1.seq = 1;
    t1.cmd = Command::TURN_HEAD;
    t1.args = {{"mode", "relative"}, {"deg", 120.0}};
    engine.handle_command(0, t1, 0.0);
    CommandMessage t2;
    t2.seq = 2;
    t2.cmd = Command::TURN_HEAD;
    t2.args = {{"mode", "absolute"}, {"deg", 10.0}};
    engine.handle_command(0, t2, 0.2);
    engine.run_all();
    int done = 0, cancelled = 0;
    for (const EventMessage& e : engine.event_log()) {
        if (e.kind == EventKind::HEAD_DONE) ++done;
        if (e.kind == EventKind::HEAD_CANCELLED) ++cancelled;
    }
    CHECK(done == 1);
    CHECK(cancelled == 1);
    CHECK(engine.head_heading() == doctest::Approx(10.0));
}

TEST_CASE("identical seeds give identical event logs") {
    auto run = [](uint64_t seed) {
        Engine engine = make_engine(barking_scene(), seed);
        engine.run_all();
        std::string out;
        for (const EventMessage& e : engine.event_log()) out += to_json(e).dump() + "\n";
        return out;
    };
    CHECK(run(42) == run(42));
    CHECK(run(42) != run(43)); // the noise actually depends on the seed
}

TEST_CASE("stream ends emit STREAM_ENDED") {
    Engine engine = make_engine(barking_scene(), 77, true);
    engine.run_all();
    bool ended = false;
    for (const EventMessage& e : engine.event_log())
        if (e.kind == EventKind::STREAM_ENDED) ended = true;
    CHECK(ended);
}
