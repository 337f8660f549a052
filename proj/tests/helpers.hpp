#pragma once

// Shared scene/registry builders for the test suites.

#include <string>
#include <vector>

#include "earsim/config.hpp"
#include "earsim/ontology.hpp"
#include "earsim/scene.hpp"

namespace earsim::test {

inline SimConfig default_config() {
    SimConfig c;
    c.ear.finalize();
    return c;
}

inline SoundSource simple_source(const std::string& id, const std::string& tpl, double az,
                                 double dist, double level, double onset = 0.0,
                                 double duration = 1.0) {
    SoundSource s;
    s.id = id;
    s.template_id = tpl;
    s.onset_s = onset;
    s.duration_s = duration;
    s.level_db_at_1m = level;
    s.trajectory = {{0.0, az, dist}};
    return s;
}

inline AuditoryScene empty_scene(double duration = 1.0, double background = 30.0) {
    AuditoryScene scene;
    scene.duration_s = duration;
    scene.background_db = background;
    scene.sample_rate_hz = 16000.0;
    scene.frame_hop_s = 0.02;
    return scene;
}

} // namespace earsim::test
