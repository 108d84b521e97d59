// Acceptance checks. `acceptance N` runs criterion N, no argument runs all.
// Each criterion prints one line: "C<N> PASS|FAIL <measured values>".

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "combsim/channel.hpp"
#include "combsim/dsp.hpp"
#include "combsim/metrics.hpp"
#include "combsim/report.hpp"
#include "combsim/rng.hpp"
#include "combsim/runner.hpp"
#include "combsim/scenario.hpp"
#include "combsim/txrx.hpp"

using namespace combsim;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Scenario preset(const std::string& name) { return load_scenario(std::string(PRESET_DIR) + "/" + name + ".json"); }

int threads() { return 4; }

// 1. FOE arithmetic.
Verdict c1() {
    const double f = foe_precalc(1, 941.101e6, 17);
    const bool ok = std::abs(f - 55358882.35) < 0.005 && std::abs(f / 1e6 - 55.358882) < 5e-7;
    return {ok, fmt("foe_precalc(1) = %.2f Hz", f)};
}

// 2. Residual FOE, all 20 channels, locked vs unlocked.
Verdict c2() {
    Scenario s;
    s.name = "acceptance_foe";
    s.sweep.modes = {CoherenceMode::LockedCombs, CoherenceMode::UnlockedCombs};
    const auto r = run_scenario(s, threads());
    double lock_max = 0.0, lock2 = 0.0, unl2 = 0.0;
    std::size_t nl = 0, nu = 0;
    for (const auto& c : r.channels) {
        const double f = c.metrics.foe_error_hz;
        if (c.mode == CoherenceMode::LockedCombs) {
            lock_max = std::max(lock_max, std::abs(f));
            lock2 += f * f;
            ++nl;
        } else {
            unl2 += f * f;
            ++nu;
        }
    }
    const double lock_rms = std::sqrt(lock2 / nl), unl_rms = std::sqrt(unl2 / nu);
    const double ratio = unl_rms / lock_rms;
    return {nl == 20 && nu == 20 && lock_max < 500.0 && ratio >= 100.0,
            fmt("locked max |FOE| %.1f Hz (rms %.1f), unlocked rms %.1f Hz, ratio %.0f (need < 500 Hz, >= 100)",
                lock_max, lock_rms, unl_rms, ratio)};
}

RunResult beat_notes() {
    auto s = preset("fig1c");
    return run_scenario(s, threads());
}

// 3. OFD plateau scaling against (17 - m)^-2.
Verdict c3() {
    const auto r = beat_notes();
    std::map<int, double> plateau;
    for (const auto& b : r.beat_notes)
        if (b.mode == CoherenceMode::LockedCombs) plateau[b.m] = b.plateau;
    bool ok = true;
    std::string detail;
    for (auto [a, b] : {std::pair{1, 5}, std::pair{5, 10}, std::pair{1, 10}}) {
        const double got = plateau.at(a) / plateau.at(b);
        const double want = std::pow(17.0 - b, 2) / std::pow(17.0 - a, 2);
        const double err = std::max(got / want, want / got);
        ok = ok && err <= 2.0;
        detail += fmt("S%d/S%d %.3g vs %.3g; ", a, b, got, want);
    }
    return {ok, detail + "need each within 2x"};
}

// 4. Locked m=17 and unlocked m=1 widths from one default config.
Verdict c4() {
    const auto r = beat_notes();
    double locked = NAN, unlocked = NAN, rbw = NAN;
    for (const auto& b : r.beat_notes) {
        if (b.mode == CoherenceMode::LockedCombs && b.m == 17) locked = b.fwhm.hz, rbw = b.fwhm.rbw;
        if (b.mode == CoherenceMode::UnlockedCombs && b.m == 1) unlocked = b.fwhm.hz;
    }
    return {locked <= 5.0 && rbw <= 1.0 && unlocked >= 3e3,
            fmt("locked m=17 FWHM %.2f Hz at %.2f Hz RBW (need <= 5), unlocked m=1 FWHM %.0f Hz (need >= 3000)", locked,
                rbw, unlocked)};
}

// 5. Allan deviation at 1 s, line 1.
Verdict c5() {
    auto s = preset("fig1d");
    s.allan.lines = {1};
    const auto r = run_scenario(s, threads());
    double locked = NAN, unlocked = NAN;
    for (const auto& a : r.allan)
        for (std::size_t k = 0; k < a.allan.gate_times_s.size(); ++k)
            if (a.allan.gate_times_s[k] == 1.0) (a.mode == CoherenceMode::LockedCombs ? locked : unlocked) = a.allan.deviations[k];
    const double ratio = unlocked / locked;
    return {s.allan.duration >= 100.0 && ratio >= 1e3,
            fmt("ADEV(1 s) locked %.3g Hz, unlocked %.3g Hz, ratio %.3g (need >= 1e3, record %.0f s)", locked, unlocked,
                ratio, s.allan.duration)};
}

// 6. Largest tolerable CPE skip per coherence mode, channel 10, ten seeds.
Verdict c6() {
    auto s = preset("fig3c");
    s.channels = {10};
    s.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto r = run_scenario(s, threads());
    int passes = 0;
    std::string detail;
    for (auto seed : s.seeds) {
        const int l = max_tolerable_skip(r.sweep, CoherenceMode::LockedCombs, seed, 10, s.sweep.target_ber);
        const int u = max_tolerable_skip(r.sweep, CoherenceMode::UnlockedCombs, seed, 10, s.sweep.target_ber);
        const int i = max_tolerable_skip(r.sweep, CoherenceMode::IndependentLasers, seed, 10, s.sweep.target_ber);
        const bool ok = l >= 10 * u && u >= i && l >= 100 * i;
        passes += ok;
        detail += fmt("%d:%d/%d/%d%s ", static_cast<int>(seed), l, u, i, ok ? "" : "x");
    }
    return {passes * 2 > static_cast<int>(s.seeds.size()),
            fmt("%d/%zu seeds ordered (seed:locked/unlocked/independent) ", passes, s.seeds.size()) + detail};
}

// 7. Master-slave penalty.
Verdict c7() {
    auto s = preset("fig3f");
    s.seeds = {1, 2, 3, 4, 5};
    const auto r = run_scenario(s, threads());
    bool ok = !r.master_slave.empty();
    double worst_ratio = 0.0, worst_ber = 0.0;
    for (const auto& row : r.master_slave) {
        if (row.m == row.master) continue;
        const double ind = row.individual.ratio(), sl = row.slave.ratio();
        ok = ok && sl <= 2.0 * ind && sl <= 3.8e-3;
        if (ind > 0) worst_ratio = std::max(worst_ratio, sl / ind);
        worst_ber = std::max(worst_ber, sl);
    }
    return {ok, fmt("worst slave/individual BER ratio %.2f (need <= 2), worst slave BER %.3g (need <= 3.8e-3), %zu rows",
                    worst_ratio, worst_ber, r.master_slave.size())};
}

// 8. CPE operation counts.
Verdict c8() {
    const auto s = preset("discussion");
    const auto r = run_scenario(s, 1);
    std::size_t ms = 0, ind = 0;
    for (const auto& c : r.cpe_ops) (c.master_slave ? ms : ind) = c.ops;
    return {ms == 13 && ind == 12500,
            fmt("master-slave i=1000 over 10 channels: %zu (need 13); independent i=10 over 10 channels: %zu (need 12500)",
                ms, ind)};
}

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double gray16_ber(double snr) {
    const double a = std::sqrt(2.0 * snr / 10.0);
    return (3.0 * q_func(a) + 2.0 * q_func(3.0 * a) - q_func(5.0 * a)) / 4.0;
}

// 9. AWGN BER against theory through the waveform path, and the dispersion round trip.
Verdict c9() {
    ModulationConfig mc;
    mc.frame_length = 400000;
    const std::size_t n = mc.frame_length * mc.samples_per_symbol;
    const PhaseTrajectory zero(std::vector<double>(n, 0.0), mc.sample_rate());
    double worst = 0.0;
    int points = 0;
    std::string detail;
    for (double db = 6.0; db <= 19.0; db += 1.0) {
        const double snr = std::pow(10.0, db / 10.0);
        const double theory = gray16_ber(snr);
        if (theory < 1e-4 || theory > 1e-1) continue;
        const std::size_t frames = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(3000.0 / (theory * 4 * mc.frame_length))));
        BerCount total;
        for (std::size_t f = 0; f < frames; ++f) {
            const auto seed = stream_seed(9, "awgn", static_cast<std::int64_t>(db * 10) * 100 + static_cast<std::int64_t>(f));
            const auto frame = qam16_mod(random_bits(4 * mc.frame_length, seed));
            auto w = modulate_line(frame, mc, zero);
            w = add_noise(w, NoiseTarget::psd(1.0 / (snr * mc.baud)), seed + 1);
            const auto b = ber(frame.bits, qam16_demap(matched_filter(w, mc.samples_per_symbol)));
            total.errors += b.errors;
            total.bits += b.bits;
        }
        const double rel = std::abs(total.ratio() / theory - 1.0);
        worst = std::max(worst, rel);
        ++points;
        detail += fmt("%.0f dB %.3g/%.3g; ", db, total.ratio(), theory);
    }

    const LinkConfig link;
    const double line = link.reference_frequency + 10 * link.grid_spacing;
    const auto frame = qam16_mod(random_bits(4 * mc.frame_length, 77));
    const auto clean = modulate_line(frame, mc, zero);
    const auto noise_psd = NoiseTarget::psd(1.0 / (std::pow(10.0, 1.7) * mc.baud));
    const auto direct = matched_filter(add_noise(clean, noise_psd, 78), mc.samples_per_symbol);
    const auto round = matched_filter(cd_compensate(add_noise(apply_dispersion(clean, link, line), noise_psd, 78), link, line),
                                      mc.samples_per_symbol);
    const double evm_direct = evm_pct(direct, frame.symbols), evm_round = evm_pct(round, frame.symbols);
    const double penalty = evm_round - evm_direct;
    return {points >= 5 && worst <= 0.10 && penalty < 0.5,
            fmt("%d SNR points, worst relative BER error %.3f (need <= 0.10); CD round-trip EVM penalty %.4f%% (need < 0.5); ",
                points, worst, penalty) +
                detail};
}

// 10. XPM broadening of the pilot.
Verdict c10() {
    const auto s = preset("fig2de");
    const auto r = run_scenario(s, 1);
    double with = NAN, without = NAN, rbw_with = NAN, rbw_without = NAN;
    for (const auto& x : r.xpm) {
        if (x.dispersion) with = x.broadening_hz, rbw_with = x.rbw_hz;
        else without = x.broadening_hz, rbw_without = x.rbw_hz;
    }
    return {with < 2.0 * rbw_with && without > 10.0 * rbw_without,
            fmt("SSMF beta2: broadening %.3g Hz vs 2 x RBW %.3g Hz; beta2 = 0: broadening %.3g Hz vs 10 x RBW %.3g Hz", with,
                2.0 * rbw_with, without, 10.0 * rbw_without)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 11. Byte-identical CSVs across thread counts.
Verdict c11() {
    const auto base = fs::temp_directory_path() / "combsim_acceptance_c11";
    fs::remove_all(base);
    bool ok = true;
    std::size_t compared = 0;
    for (const char* name : {"fig3e", "fig3c", "fig2f"}) {
        const auto s = preset(name);
        for (int t : {1, threads()}) {
            const auto dir = base / (std::string(name) + "_t" + std::to_string(t));
            write_run(dir.string(), s, run_scenario(s, t), {t, false, "-"});
        }
        for (const auto& e : fs::directory_iterator(base / (std::string(name) + "_t1"))) {
            if (e.path().extension() != ".csv") continue;
            const auto other = base / (std::string(name) + "_t" + std::to_string(threads())) / e.path().filename();
            ok = ok && slurp(e.path()) == slurp(other);
            ++compared;
        }
    }
    fs::remove_all(base);
    return {ok && compared > 0, fmt("%zu CSV files compared between 1 and %d threads", compared, threads())};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Verdict()>> all{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11};
    std::vector<int> which;
    if (argc > 1) {
        const int k = std::atoi(argv[1]);
        if (k < 1 || k > static_cast<int>(all.size())) {
            std::fprintf(stderr, "criterion must be 1..%zu\n", all.size());
            return 2;
        }
        which.push_back(k);
    } else {
        for (int k = 1; k <= static_cast<int>(all.size()); ++k) which.push_back(k);
    }
    bool ok = true;
    for (int k : which) {
        Verdict v;
        try {
            v = all[static_cast<std::size_t>(k - 1)]();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("C%d %s %s\n", k, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        ok = ok && v.pass;
    }
    return ok ? 0 : 1;
}
