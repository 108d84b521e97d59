#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "combsim/runner.hpp"

using namespace combsim;
using Catch::Approx;

namespace {

Scenario small(std::vector<int> channels = {1, 5, 10}) {
    Scenario s;
    s.name = "small";
    s.channels = std::move(channels);
    s.mod.frame_length = 6400;
    s.warmup = 2e-4;
    return s;
}

}  // namespace

TEST_CASE("parallel_for visits every index once") {
    for (int threads : {1, 2, 7}) {
        std::vector<std::atomic<int>> hits(50);
        parallel_for(50, threads, [&](std::size_t k) { hits[k]++; });
        for (auto& h : hits) CHECK(h == 1);
    }
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
    for (int threads : {1, 3}) {
        try {
            parallel_for(20, threads, [](std::size_t k) {
                if (k == 4 || k == 15) throw std::runtime_error("index " + std::to_string(k));
            });
            FAIL("expected throw");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "index 4");
        }
    }
}

TEST_CASE("Simulated line phases obey the inter-comb decomposition") {
    const auto s = small();
    const std::vector<int> lines{-4, 1, 5, 10};
    const auto fp = simulate_frame_phases(s, CoherenceMode::LockedCombs, 3, lines, 20000);
    REQUIRE(fp.tx_line.count(0));
    REQUIRE(fp.tx_line.count(17));
    // Acquisition may drop lock briefly during warm-up, never afterwards.
    const auto settled = static_cast<std::size_t>(s.warmup * s.control_rate);
    for (std::size_t k = settled; k < fp.residual.locked.size(); ++k) REQUIRE(fp.residual.locked[k] == 1);
    for (int m : {-4, 1, 5, 10, 17}) {
        const auto direct = fp.tx_line.at(m) - fp.rx_line.at(m);
        const auto composed = compose_inter_comb_phase(m, fp.tx, fp.rx, fp.residual, s.lock).phase;
        for (std::size_t k = 0; k < direct.size(); ++k)
            REQUIRE(direct.samples[k] == Approx(composed.samples[k]).margin(1e-9));
    }
    const auto d17 = fp.tx_line.at(17) - fp.rx_line.at(17);
    for (std::size_t k = 0; k < d17.size(); ++k)
        REQUIRE(d17.samples[k] == Approx(fp.residual.delta_phi.samples[k]).margin(1e-9));
}

TEST_CASE("Unlocked combs match the raw line-phase difference") {
    const auto s = small();
    const auto fp = simulate_frame_phases(s, CoherenceMode::UnlockedCombs, 3, {5}, 5000);
    LockConfig off = s.lock;
    off.enabled = false;
    const auto direct = fp.tx_line.at(5) - fp.rx_line.at(5);
    const auto composed = compose_inter_comb_phase(5, fp.tx, fp.rx, fp.residual, off).phase;
    for (std::size_t k = 0; k < direct.size(); ++k) REQUIRE(direct.samples[k] == Approx(composed.samples[k]).margin(1e-9));
    for (auto l : fp.residual.locked) REQUIRE(l == 0);
}

TEST_CASE("Frame control samples cover warm-up and the frame") {
    const auto s = small();
    const double need = (s.warmup + s.mod.frame_length / s.mod.baud) * s.control_rate;
    CHECK(static_cast<double>(frame_control_samples(s)) >= need + 1.0);
}

TEST_CASE("Static actuation puts the locked beat on the reference") {
    const Scenario s;
    const double free_beat = s.lock.locked_index * (s.comb_rx.mode_spacing - s.comb_tx.mode_spacing);
    CHECK(free_beat + s.lock.locked_index * static_actuation(s) == Approx(s.lock.f_ref));
}

TEST_CASE("Noiseless lasers at high SNR give error-free channels") {
    auto s = small({1, 5});
    s.independent_linewidth = 0.0;
    s.link.rx_snr_db = 40.0;
    s.link.ase_psd = 0.0;
    s.coherence_mode = CoherenceMode::IndependentLasers;
    const auto r = run_scenario(s, 1);
    REQUIRE(r.channels.size() == 2);
    for (const auto& c : r.channels) {
        CHECK(c.metrics.ber.errors == 0);
        CHECK(c.metrics.ber.bits == 4 * s.mod.frame_length);
        CHECK(c.metrics.snr_db > 35.0);
    }
}

TEST_CASE("Locked combs at high SNR give error-free channels with the precalculated FOE") {
    auto s = small({-3, 5});
    s.link.rx_snr_db = 40.0;
    s.link.ase_psd = 0.0;
    const auto r = run_scenario(s, 1);
    for (const auto& c : r.channels) CHECK(c.metrics.ber.errors == 0);
    CHECK(r.out_of_lock_samples == 0);
}

TEST_CASE("Results do not depend on the thread count") {
    auto s = small();
    s.seeds = {1, 2};
    s.sweep.modes = {CoherenceMode::LockedCombs, CoherenceMode::IndependentLasers};
    s.trace_channels = {5};
    const auto a = run_scenario(s, 1);
    const auto b = run_scenario(s, 3);
    REQUIRE(a.channels.size() == 12);
    REQUIRE(a.channels.size() == b.channels.size());
    for (std::size_t k = 0; k < a.channels.size(); ++k) {
        CHECK(a.channels[k].mode == b.channels[k].mode);
        CHECK(a.channels[k].seed == b.channels[k].seed);
        CHECK(a.channels[k].metrics.m == b.channels[k].metrics.m);
        CHECK(a.channels[k].metrics.ber.errors == b.channels[k].metrics.ber.errors);
        CHECK(a.channels[k].metrics.foe_error_hz == b.channels[k].metrics.foe_error_hz);
    }
    REQUIRE(a.traces.size() == b.traces.size());
    for (std::size_t k = 0; k < a.traces.size(); ++k) CHECK(a.traces[k].phase == b.traces[k].phase);
}

TEST_CASE("Adding a channel leaves the others unchanged") {
    auto s = small({1, 5});
    const auto a = run_scenario(s, 1);
    s.channels = {1, 5, 9};
    const auto b = run_scenario(s, 1);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(a.channels[k].metrics.ber.errors == b.channels[k].metrics.ber.errors);
        CHECK(a.channels[k].metrics.foe_error_hz == b.channels[k].metrics.foe_error_hz);
    }
}

TEST_CASE("Losing lock is reported, not fatal") {
    auto s = small({1});
    s.warmup = 0.02;  // long enough for the rep-rate jitter to leave the narrow range
    s.lock.actuator_range = std::abs(static_actuation(s)) + 50.0;
    RunResult r;
    REQUIRE_NOTHROW(r = run_scenario(s, 1));
    CHECK(r.out_of_lock_samples > 0);
    CHECK(r.channels.size() == 1);
}

TEST_CASE("A master channel drives the CPE of the others") {
    auto s = small({1, 5, 10});
    s.dsp.master_channel = 10;
    s.link.rx_snr_db = 30.0;
    const auto r = run_scenario(s, 1);
    REQUIRE(r.channels.size() == 3);
    for (const auto& c : r.channels) {
        CHECK(c.metrics.cpe_ops == (c.metrics.m == 10 ? 200u : 0u));
        CHECK(c.metrics.ber.ratio() < 1e-3);
    }
}

TEST_CASE("Largest tolerable skip") {
    const auto mode = CoherenceMode::LockedCombs;
    std::vector<SweepRow> rows;
    auto add = [&](int skip, std::size_t errors) { rows.push_back({mode, 1, 5, skip, {errors, 1000}, 0}); };
    add(100, 2);
    add(0, 1);
    add(10, 1);
    add(1000, 9);
    add(5000, 3);
    CHECK(max_tolerable_skip(rows, mode, 1, 5, 3.8e-3) == 100);
    CHECK(max_tolerable_skip(rows, mode, 1, 5, 1e-2) == 5000);
    CHECK(max_tolerable_skip(rows, mode, 1, 5, 1e-4) == -1);
    CHECK(max_tolerable_skip(rows, mode, 2, 5, 1.0) == -1);
}

TEST_CASE("BER does not fall as the skip factor grows") {
    auto s = small({3});
    s.mod.frame_length = 64000;
    s.experiment = Experiment::CpeSweep;
    s.coherence_mode = CoherenceMode::IndependentLasers;
    s.sweep.skip_blocks = {0, 3, 30, 300, 1999};
    const auto r = run_scenario(s, 1);
    REQUIRE(r.sweep.size() == 5);
    int rises = 0;
    for (std::size_t k = 1; k < r.sweep.size(); ++k) rises += r.sweep[k].ber.errors >= r.sweep[k - 1].ber.errors;
    CHECK(rises >= 3);
    CHECK(r.sweep.back().ber.ratio() > r.sweep.front().ber.ratio());
    CHECK(r.sweep.front().cpe_ops == 2000);
    CHECK(r.sweep.back().cpe_ops == 1);
}
