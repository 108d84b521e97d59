#include <catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "combsim/scenario.hpp"

using namespace combsim;
using Catch::Approx;
using nlohmann::json;

namespace {

std::string field_of(const json& j) {
    try {
        scenario_from_json(j).validate();
    } catch (const Error& e) {
        return e.field();
    }
    return "<none>";
}

}  // namespace

TEST_CASE("Defaults describe the reference link") {
    const Scenario s;
    CHECK_NOTHROW(s.validate());
    CHECK(s.lock.f_ref == 941.101e6);
    CHECK(s.lock.locked_index == 17);
    CHECK(s.mod.baud == 12.5e9);
    CHECK(s.mod.frame_length == 400000);
    CHECK(s.dsp.cpe_block == 32);
    CHECK(s.channels.size() == 20);
    CHECK(s.modes() == std::vector<CoherenceMode>{CoherenceMode::LockedCombs});
}

TEST_CASE("An empty object parses to the defaults") {
    const auto s = scenario_from_json(json::object());
    CHECK(scenario_to_json(s) == scenario_to_json(Scenario{}));
}

TEST_CASE("Channel errors name the offending entry") {
    CHECK(field_of({{"channels", {3, 0}}}) == "channels[1]");
    CHECK(field_of({{"channels", {17}}}) == "channels[0]");
    CHECK(field_of({{"channels", {5, 5}}}) == "channels[1]");
    CHECK(field_of({{"channels", {25}}}) == "channels[0]");
    CHECK(field_of({{"channels", json::array()}}) == "channels");
    CHECK(field_of({{"channels", {1.5}}}) == "channels[0]");
}

TEST_CASE("Unknown keys and wrong types are rejected with their path") {
    CHECK(field_of({{"chanels", {1}}}) == "chanels");
    CHECK(field_of({{"lock", {{"f_reff", 1.0}}}}) == "lock.f_reff");
    CHECK(field_of({{"lock", {{"f_ref", "fast"}}}}) == "lock.f_ref");
    CHECK(field_of({{"coherence_mode", "Phased"}}) == "coherence_mode");
    CHECK(field_of({{"seeds", {-1}}}) == "seeds[0]");
    CHECK(field_of({{"mod", {{"format", "QPSK"}}}}) == "mod.format");
}

TEST_CASE("Cross-field checks") {
    CHECK(field_of({{"dsp", {{"cpe_block", 16}}}}) == "dsp.cpe_block");
    CHECK(field_of({{"control_rate", 1.0e6}}) == "lock.loop_bandwidth");
    CHECK(field_of({{"master_slave", {{"master", 2}, {"slaves", {2}}}}}) == "master_slave.slaves[0]");
    CHECK(field_of({{"master_slave", {{"calibration_blocks", 0}}}}) == "master_slave.calibration_blocks");
    CHECK(field_of({{"trace_channels", {1}}, {"channels", {2}}}) == "trace_channels[0]");
    CHECK(field_of({{"channels", {1, 2}}, {"dsp", {{"master_channel", 3}}}}) == "dsp.master_channel");
    CHECK(field_of({{"channels", {1, 2}}, {"dsp", {{"master_channel", 2}}}}) == "<none>");
}

TEST_CASE("Scenario JSON round trip") {
    Scenario s;
    s.name = "rt";
    s.channels = {1, -3, 9};
    s.seeds = {4, 5};
    s.lock.loop_bandwidth = 50e3;
    s.dsp.master_channel = 9;
    s.dsp.equalizer = EqualizerKind::Volterra2;
    s.sweep.modes = {CoherenceMode::UnlockedCombs, CoherenceMode::IndependentLasers};
    s.cpe_ops.cases = {{7, 3, false}};
    s.trace_channels = {-3};
    s.validate();
    const auto j = scenario_to_json(s);
    const auto back = scenario_from_json(j);
    CHECK(scenario_to_json(back) == j);
    CHECK(back.channels == s.channels);
    CHECK(back.dsp.master_channel == 9);
    CHECK(back.lock.loop_bandwidth == 50e3);
    CHECK(back.link.fluct.fiber_fluct_rms == back.noise.fiber_fluct_rms);
}

TEST_CASE("Every preset loads and validates") {
    std::size_t count = 0;
    for (const auto& e : std::filesystem::directory_iterator(PRESET_DIR)) {
        if (e.path().extension() != ".json") continue;
        INFO(e.path().string());
        Scenario s;
        REQUIRE_NOTHROW(s = load_scenario(e.path().string()));
        CHECK(s.name == e.path().stem().string());
        ++count;
    }
    CHECK(count >= 11);
    CHECK_THROWS_AS(load_scenario("/nonexistent/x.json"), Error);
}

TEST_CASE("Full scale sets 21 Gbaud and the twenty channels") {
    Scenario s;
    s.channels = {1, 5};
    s.trace_channels = {1, 5};
    apply_full_scale(s);
    CHECK(s.trace_channels == std::vector<int>{5});
    CHECK(s.mod.baud == 21e9);
    CHECK(s.channels == default_channels());
    CHECK(default_channels().size() == 20);
    CHECK_NOTHROW(s.validate());
}
