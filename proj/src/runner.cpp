#include "combsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "combsim/channel.hpp"
#include "combsim/dsp.hpp"
#include "combsim/rng.hpp"

namespace combsim {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
    if (n == 0) return;
    const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
    if (workers == 1 || n == 1) {
        for (std::size_t k = 0; k < n; ++k) f(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto body = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n) return;
            try {
                f(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (k < failed_at) failed_at = k, failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double static_actuation(const Scenario& s) {
    const double n = static_cast<double>(s.lock.locked_index);
    return s.lock.f_ref / n - (s.comb_rx.mode_spacing - s.comb_tx.mode_spacing);
}

// ---------------------------------------------------------------------------

struct CombPairSimulator::Sources {
    WienerPhaseSource pump;
    RepRateJitterSource rep_tx;
    RepRateJitterSource rep_rx;
    std::vector<FiberFluctSource> ff;
    std::vector<WienerPhaseSource> laser_tx;
    std::vector<WienerPhaseSource> laser_rx;
    std::optional<LockServo> servo;
};

CombPairSimulator::CombPairSimulator(const Scenario& s, CoherenceMode mode, std::uint64_t seed, std::vector<int> lines)
    : mode_(mode), rate_(s.control_rate), locked_index_(s.lock.locked_index) {
    lines.push_back(0);
    lines.push_back(locked_index_);
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    lines_ = lines;

    const auto& n = s.noise;
    src_ = std::make_unique<Sources>(Sources{
        WienerPhaseSource(n.pump_linewidth, rate_, stream_seed(seed, "pump")),
        RepRateJitterSource(n.rep_rate_jitter_rms, n.rep_rate_corner, rate_, stream_seed(seed, "rep_tx")),
        RepRateJitterSource(n.rep_rate_jitter_rms, n.rep_rate_corner, rate_, stream_seed(seed, "rep_rx")),
        {}, {}, {}, std::nullopt});
    ff_.assign(lines_.size(), 0.0);
    laser_tx_.assign(lines_.size(), 0.0);
    laser_rx_.assign(lines_.size(), 0.0);
    if (mode_ == CoherenceMode::IndependentLasers) {
        for (int m : lines_) {
            src_->laser_tx.emplace_back(s.independent_linewidth, rate_, stream_seed(seed, "laser_tx", m));
            src_->laser_rx.emplace_back(s.independent_linewidth, rate_, stream_seed(seed, "laser_rx", m));
        }
        in_lock_ = false;
        return;
    }
    const std::uint64_t fiber_seed = stream_seed(seed, "fiber");
    LinkConfig link = s.link;
    link.fluct = s.noise;
    for (int m : lines_) src_->ff.emplace_back(m, link, rate_, fiber_seed);
    actuation_ = static_actuation(s);
    if (mode_ == CoherenceMode::LockedCombs && s.lock.enabled)
        src_->servo.emplace(s.lock, rate_, stream_seed(seed, "detector"), actuation_);
    else
        in_lock_ = false;
}

CombPairSimulator::~CombPairSimulator() = default;

std::size_t CombPairSimulator::slot(int m) const {
    auto it = std::lower_bound(lines_.begin(), lines_.end(), m);
    if (it == lines_.end() || *it != m) throw Error("line " + std::to_string(m) + " is not simulated", "lines");
    return static_cast<std::size_t>(it - lines_.begin());
}

void CombPairSimulator::step() {
    auto& s = *src_;
    if (mode_ == CoherenceMode::IndependentLasers) {
        for (std::size_t k = 0; k < lines_.size(); ++k) {
            laser_tx_[k] = s.laser_tx[k].next();
            laser_rx_[k] = s.laser_rx[k].next();
        }
        return;
    }
    pump_ = s.pump.next();
    rep_tx_ = s.rep_tx.next();
    rep_rx_ = s.rep_rx.next();
    for (std::size_t k = 0; k < lines_.size(); ++k) ff_[k] = s.ff[k].next();
    const double n = static_cast<double>(locked_index_);
    const double open_loop = ff_[slot(locked_index_)] - ff_[slot(0)] + n * (rep_tx_ - rep_rx_);
    if (s.servo) {
        const auto r = s.servo->step(open_loop);
        delta_phi_ = r.delta_phi;
        correction_ = r.correction;
        actuation_ = r.actuation;
        in_lock_ = r.locked;
    } else {
        delta_phi_ = open_loop;
    }
}

double CombPairSimulator::fiber(int m) const { return ff_[slot(m)]; }

double CombPairSimulator::tx_phase(int m) const {
    if (mode_ == CoherenceMode::IndependentLasers) return laser_tx_[slot(m)];
    return pump_ + ff_[slot(m)] + m * rep_tx_;
}

double CombPairSimulator::rx_phase(int m) const {
    if (mode_ == CoherenceMode::IndependentLasers) return laser_rx_[slot(m)];
    return pump_ + ff_[slot(0)] + m * (rep_rx_ + correction_);
}

// ---------------------------------------------------------------------------

std::size_t frame_control_samples(const Scenario& s) {
    const double frame = static_cast<double>(s.mod.frame_length) / s.mod.baud;
    return static_cast<std::size_t>(std::ceil((s.warmup + frame) * s.control_rate)) + 2;
}

FramePhases simulate_frame_phases(const Scenario& s, CoherenceMode mode, std::uint64_t seed,
                                  const std::vector<int>& lines, std::size_t n) {
    CombPairSimulator sim(s, mode, seed, lines);
    const double rate = s.control_rate;
    const auto& all = sim.lines();
    std::vector<double> pump(n), rep_tx(n), rep_rx(n), dphi(n);
    std::map<int, std::vector<double>> ff, txl, rxl;
    for (int m : all) ff[m].resize(n), txl[m].resize(n), rxl[m].resize(n);
    FramePhases fp;
    fp.residual.locked.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        sim.step();
        pump[k] = sim.pump();
        rep_tx[k] = sim.rep_tx();
        rep_rx[k] = sim.rep_rx_free() + sim.correction();
        dphi[k] = sim.delta_phi();
        fp.residual.locked[k] = sim.in_lock() ? 1 : 0;
        for (int m : all) {
            if (mode != CoherenceMode::IndependentLasers) ff[m][k] = sim.fiber(m);
            txl[m][k] = sim.tx_phase(m);
            rxl[m][k] = sim.rx_phase(m);
        }
    }
    std::vector<double> conveyed(n);
    for (std::size_t k = 0; k < n; ++k) conveyed[k] = pump[k] + ff[0][k];
    fp.tx.pump_int = PhaseTrajectory(std::move(pump), rate);
    fp.tx.rep_fundamental = PhaseTrajectory(std::move(rep_tx), rate);
    for (int m : all) {
        fp.tx.ff[m] = PhaseTrajectory(std::move(ff[m]), rate);
        fp.tx_line[m] = PhaseTrajectory(std::move(txl[m]), rate);
        fp.rx_line[m] = PhaseTrajectory(std::move(rxl[m]), rate);
    }
    fp.rx.conveyed_pump = PhaseTrajectory(std::move(conveyed), rate);
    fp.rx.rep_fundamental = PhaseTrajectory(std::move(rep_rx), rate);
    fp.residual.delta_phi = PhaseTrajectory(std::move(dphi), rate);
    return fp;
}

// ---------------------------------------------------------------------------

namespace {

PhaseTrajectory symbol_rate_wiener(double linewidth, double baud, std::size_t symbols, double fs, std::size_t n,
                                   std::uint64_t seed) {
    auto p = synth_wiener_phase(linewidth, symbols + 1, baud, seed);
    return resample_linear(p, fs, n, 0.0);
}

}  // namespace

ChannelRx receive_channel(const Scenario& s, CoherenceMode mode, std::uint64_t seed, int m, const FramePhases* phases) {
    const auto& mc = s.mod;
    const double fs = mc.sample_rate();
    const std::size_t n = mc.frame_length * static_cast<std::size_t>(mc.samples_per_symbol);
    const double power = dbm_to_watts(s.link.launch_power_dbm);

    ChannelRx out;
    out.m = m;
    out.frame = qam16_mod(random_bits(4 * mc.frame_length, stream_seed(seed, "bits", m)), m);

    PhaseTrajectory tx_phase, lo_phase;
    double lo_offset = 0.0;
    if (mode == CoherenceMode::IndependentLasers) {
        tx_phase = symbol_rate_wiener(s.independent_linewidth, mc.baud, mc.frame_length, fs, n,
                                      stream_seed(seed, "laser_tx_data", m));
        lo_phase = symbol_rate_wiener(s.independent_linewidth, mc.baud, mc.frame_length, fs, n,
                                      stream_seed(seed, "laser_rx_data", m));
    } else {
        if (!phases) throw Error("comb modes need simulated frame phases", "phases");
        tx_phase = resample_linear(phases->tx_line.at(m), fs, n, s.warmup);
        lo_phase = resample_linear(phases->rx_line.at(m), fs, n, s.warmup);
        lo_offset = nominal_offset(m, s.lock);
    }
    tx_phase.t0 = lo_phase.t0 = 0.0;
    Rng static_rng(stream_seed(seed, "static_phase", m));
    const double static_phase = kTwoPi * static_rng.uniform() - kPi;
    for (double& v : tx_phase.samples) v += static_phase;

    ComplexWaveform w = modulate_line(out.frame, mc, tx_phase);
    const double amp = std::sqrt(power);
    for (auto& v : w.samples) v *= amp;
    const double line_abs = s.comb_tx.line_frequency(m);
    if (s.simulate_dispersion) w = apply_dispersion(w, s.link, line_abs);

    w = coherent_mix(w, lo_phase, lo_offset);
    const double rx_psd = power / (std::pow(10.0, s.link.rx_snr_db / 10.0) * mc.baud);
    w = add_noise(w, NoiseTarget::psd(s.link.ase_psd + rx_psd), stream_seed(seed, "rx_noise", m));
    if (s.simulate_dispersion) w = cd_compensate(w, s.link, line_abs);

    switch (s.dsp.foe_mode) {
        case FoeMode::Precalc:
            out.foe_applied_hz = mode == CoherenceMode::IndependentLasers
                                     ? 0.0
                                     : foe_precalc(m, s.lock.f_ref, s.lock.locked_index);
            break;
        case FoeMode::FourthPower: out.foe_applied_hz = -foe_fourth_power(w); break;
        case FoeMode::None: break;
    }
    if (out.foe_applied_hz != 0.0) w = frequency_shift(w, out.foe_applied_hz);

    out.symbols = matched_filter(w, mc.samples_per_symbol);
    for (auto& v : out.symbols) v /= amp;
    if (s.dsp.equalizer != EqualizerKind::None) out.symbols = equalize(out.symbols, out.frame.symbols, s.dsp);
    return out;
}

ChannelMetrics evaluate_channel(const ChannelRx& rx, const Scenario& s, int skip, CpeTrace* every_block) {
    DspConfig d = s.dsp;
    d.skip_blocks = skip;
    const auto res = cpe_pilot_block(rx.symbols, rx.frame.symbols, d, s.mod.baud);
    ChannelMetrics cm;
    cm.m = rx.m;
    cm.ber = ber(rx.frame.bits, qam16_demap(res.corrected));
    cm.evm_pct = evm_pct(res.corrected, rx.frame.symbols);
    cm.snr_db = snr_db(res.corrected, rx.frame.symbols);
    cm.cycle_slips = count_cycle_slips(res.trace);
    cm.cpe_ops = res.trace.phase_estimates.size();
    CpeTrace zero;
    if (skip == 0) {
        zero = res.trace;
    } else {
        d.skip_blocks = 0;
        zero = cpe_pilot_block(rx.symbols, rx.frame.symbols, d, s.mod.baud).trace;
    }
    cm.foe_error_hz = residual_foe_from_slope(zero);
    if (every_block) *every_block = std::move(zero);
    return cm;
}

int max_tolerable_skip(const std::vector<SweepRow>& rows, CoherenceMode mode, std::uint64_t seed, int m,
                       double target) {
    std::vector<std::pair<int, double>> pts;
    for (const auto& r : rows)
        if (r.mode == mode && r.seed == seed && r.m == m) pts.emplace_back(r.skip, r.ber.ratio());
    std::sort(pts.begin(), pts.end());
    int best = -1;
    for (const auto& [skip, b] : pts) {
        if (b > target) break;
        best = skip;
    }
    return best;
}

// ---------------------------------------------------------------------------

namespace {

struct ModeSeed {
    CoherenceMode mode;
    std::uint64_t seed;
};

std::vector<ModeSeed> mode_seeds(const Scenario& s) {
    std::vector<ModeSeed> out;
    for (auto mode : s.modes())
        for (auto seed : s.seeds) out.push_back({mode, seed});
    return out;
}

// Frame phases for every (mode, seed), computed in parallel. IndependentLasers
// entries stay empty.
std::vector<FramePhases> all_frame_phases(const Scenario& s, const std::vector<ModeSeed>& ms,
                                          const std::vector<int>& lines, int threads) {
    std::vector<FramePhases> out(ms.size());
    const std::size_t n = frame_control_samples(s);
    parallel_for(ms.size(), threads, [&](std::size_t k) {
        if (ms[k].mode != CoherenceMode::IndependentLasers)
            out[k] = simulate_frame_phases(s, ms[k].mode, ms[k].seed, lines, n);
    });
    return out;
}

// Replaces the CPE-dependent metrics of a slave channel with those obtained
// from the rescaled master trace; the FOE error stays the channel's own.
ChannelMetrics slave_metrics(const ChannelRx& rx, const Scenario& s, const CpeTrace& master, ChannelMetrics cm) {
    const int mm = *s.dsp.master_channel;
    const auto scaled = cpe_master_slave(master, mm, rx.m);
    const double off = calibrate_slave_offset(rx.symbols, rx.frame.symbols, scaled, s.master_slave.calibration_blocks);
    const auto trace = cpe_master_slave(master, mm, rx.m, off);
    const auto corrected = apply_cpe(rx.symbols, trace);
    cm.ber = ber(rx.frame.bits, qam16_demap(corrected));
    cm.evm_pct = evm_pct(corrected, rx.frame.symbols);
    cm.snr_db = snr_db(corrected, rx.frame.symbols);
    cm.cycle_slips = count_cycle_slips(trace);
    cm.cpe_ops = 0;
    return cm;
}

// Counted over the data frame only; acquisition during warm-up is expected.
std::size_t count_out_of_lock(const Scenario& s, const std::vector<ModeSeed>& ms, const std::vector<FramePhases>& fps) {
    const auto first = static_cast<std::size_t>(std::llround(s.warmup * s.control_rate));
    std::size_t c = 0;
    for (std::size_t k = 0; k < ms.size(); ++k) {
        if (ms[k].mode != CoherenceMode::LockedCombs) continue;
        const auto& f = fps[k].residual.locked;
        for (std::size_t j = first; j < f.size(); ++j) c += f[j] ? 0 : 1;
    }
    return c;
}

Psd trim_psd(const Psd& p, double center, double span) {
    Psd out;
    out.rbw = p.rbw;
    out.enbw = p.enbw;
    for (std::size_t k = 0; k < p.freq.size(); ++k)
        if (std::abs(p.freq[k] - center) <= span) out.freq.push_back(p.freq[k]), out.density.push_back(p.density[k]);
    return out;
}

std::vector<BeatRow> beat_note_job(const Scenario& s, CoherenceMode mode, std::uint64_t seed) {
    const auto& b = s.beat_notes;
    CombPairSimulator sim(s, mode, seed, b.lines);
    const double rate = s.control_rate;
    const auto warm = static_cast<std::size_t>(std::llround(s.warmup * rate));
    for (std::size_t k = 0; k < warm; ++k) sim.step();

    const auto dec = static_cast<std::size_t>(b.decimation);
    const auto n_width = static_cast<std::size_t>(std::floor(b.duration * rate / static_cast<double>(dec)));
    const auto n_plat = static_cast<std::size_t>(std::floor(b.plateau_duration * rate));
    const std::size_t total = std::max(n_width * dec, n_plat);
    const std::size_t nl = b.lines.size();
    std::vector<std::vector<cplx>> width(nl, std::vector<cplx>(n_width));
    std::vector<std::vector<cplx>> plat(nl, std::vector<cplx>(n_plat));
    std::vector<cplx> acc(nl);
    for (std::size_t k = 0; k < total; ++k) {
        sim.step();
        for (std::size_t l = 0; l < nl; ++l) {
            const int m = b.lines[l];
            const cplx z = std::polar(1.0, sim.tx_phase(m) - sim.rx_phase(m));
            if (k < n_plat) plat[l][k] = z;
            if (k < n_width * dec) {
                acc[l] += z;
                if ((k + 1) % dec == 0) {
                    width[l][k / dec] = acc[l] / static_cast<double>(dec);
                    acc[l] = {};
                }
            }
        }
    }

    std::vector<BeatRow> rows;
    const double rbw = mode == CoherenceMode::LockedCombs ? b.rbw_locked : b.rbw_unlocked;
    for (std::size_t l = 0; l < nl; ++l) {
        const int m = b.lines[l];
        const double f0 = mode == CoherenceMode::IndependentLasers ? 0.0 : nominal_offset(m, s.lock);
        ComplexWaveform ww{std::move(width[l]), rate / static_cast<double>(dec), f0};
        ComplexWaveform pw{std::move(plat[l]), rate, f0};
        const Psd wpsd = psd_welch(ww, rbw);
        const Psd ppsd = psd_welch(pw, b.plateau_rbw);
        BeatRow row{mode, seed, m, f0, fwhm(wpsd), plateau_level(ppsd, b.plateau_lo, b.plateau_hi), {}, {}};
        const double span = std::min(b.psd_span, std::max(50.0 * rbw, 5.0 * row.fwhm.hz));
        row.width_psd = trim_psd(wpsd, f0, span);
        row.plateau_psd = trim_psd(ppsd, f0, b.psd_span);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<AllanRow> allan_job(const Scenario& s, CoherenceMode mode, std::uint64_t seed) {
    const auto& a = s.allan;
    CombPairSimulator sim(s, mode, seed, a.lines);
    const double rate = s.control_rate;
    const auto warm = static_cast<std::size_t>(std::llround(s.warmup * rate));
    for (std::size_t k = 0; k < warm; ++k) sim.step();
    const auto d = static_cast<std::size_t>(std::llround(a.tau0 * rate));
    const auto readings = static_cast<std::size_t>(std::floor(a.duration / a.tau0 + 1e-9));
    const std::size_t nl = a.lines.size();
    std::vector<std::vector<double>> ph(nl, std::vector<double>(readings + 1));
    for (std::size_t r = 0; r <= readings; ++r) {
        for (std::size_t l = 0; l < nl; ++l) ph[l][r] = sim.tx_phase(a.lines[l]) - sim.rx_phase(a.lines[l]);
        if (r == readings) break;
        for (std::size_t k = 0; k < d; ++k) sim.step();
    }
    std::vector<AllanRow> rows;
    for (std::size_t l = 0; l < nl; ++l) {
        const auto f = frequency_series_from_phase(ph[l], 1.0 / a.tau0, a.tau0);
        AllanRow row{mode, seed, a.lines[l], {a.gates, allan_deviation(f, a.tau0, a.gates)}};
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<XpmRow> xpm_job(const Scenario& s, std::uint64_t seed) {
    const auto& x = s.xpm;
    ModulationConfig mc;
    mc.baud = x.baud;
    mc.samples_per_symbol = x.samples_per_symbol;
    mc.frame_length = x.symbols;
    mc.pilot_block = 1;
    const double fs = mc.sample_rate();
    const std::size_t n = x.symbols * static_cast<std::size_t>(x.samples_per_symbol);
    const double power = dbm_to_watts(s.link.launch_power_dbm);
    const double amp = std::sqrt(power);

    ComplexWaveform pilot;
    pilot.sample_rate = fs;
    pilot.samples.assign(n, cplx(amp, 0.0));
    std::vector<ComplexWaveform> data;
    for (int off : x.data_lines) {
        const auto frame = qam16_mod(random_bits(4 * x.symbols, stream_seed(seed, "xpm_bits", off)), off);
        auto w = modulate_line(frame, mc, zero_trajectory(n, fs));
        for (auto& v : w.samples) v *= amp;
        w.center_offset = off * s.link.grid_spacing;
        data.push_back(std::move(w));
    }

    std::vector<XpmRow> rows;
    for (bool disp : {true, false}) {
        LinkConfig cfg = s.link;
        if (!disp) cfg.beta2 = 0.0, cfg.beta3 = 0.0;
        std::vector<ComplexWaveform> all{pilot};
        all.insert(all.end(), data.begin(), data.end());
        const auto with = split_step_propagate(all, cfg, x.steps).front();
        const auto alone = split_step_propagate({pilot}, cfg, x.steps).front();
        const double rbw = fs / static_cast<double>(n / x.welch_segments);
        const auto fw = fwhm(psd_welch(with, rbw));
        const auto fr = fwhm(psd_welch(alone, rbw));
        // XPM phase: pilot with neighbours relative to pilot alone, mean removed.
        std::vector<double> dphi(n);
        cplx mean{};
        for (std::size_t k = 0; k < n; ++k) mean += with.samples[k] * std::conj(alone.samples[k]);
        const double ref = std::arg(mean);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            dphi[k] = wrap_phase(std::arg(with.samples[k] * std::conj(alone.samples[k])) - ref);
            acc += dphi[k] * dphi[k];
        }
        rows.push_back({disp, cfg.beta2, fw.hz, fr.hz, fw.hz - fr.hz, fw.rbw, std::sqrt(acc / static_cast<double>(n))});
    }
    return rows;
}

}  // namespace

RunResult run_scenario(const Scenario& s, int threads) {
    s.validate();
    RunResult out;
    const auto ms = mode_seeds(s);

    switch (s.experiment) {
        case Experiment::Interconnect:
        case Experiment::CpeSweep: {
            const auto fps = all_frame_phases(s, ms, s.channels, threads);
            out.out_of_lock_samples = count_out_of_lock(s, ms, fps);
            const std::size_t nc = s.channels.size();
            const bool sweep = s.experiment == Experiment::CpeSweep;
            // With a master channel, its trace is finished before any slave runs.
            const bool slaved = !sweep && s.dsp.master_channel.has_value();
            std::vector<ChannelRx> masters(slaved ? ms.size() : 0);
            std::vector<CpeTrace> master_traces(masters.size());
            parallel_for(masters.size(), threads, [&](std::size_t k) {
                masters[k] = receive_channel(s, ms[k].mode, ms[k].seed, *s.dsp.master_channel, &fps[k]);
                master_traces[k] = cpe_pilot_block(masters[k].symbols, masters[k].frame.symbols, s.dsp, s.mod.baud).trace;
            });
            std::vector<std::vector<ChannelRow>> ch(ms.size() * nc);
            std::vector<std::vector<SweepRow>> sw(ms.size() * nc);
            std::vector<std::vector<TraceRow>> tr(ms.size() * nc);
            parallel_for(ms.size() * nc, threads, [&](std::size_t job) {
                const auto& [mode, seed] = ms[job / nc];
                const int m = s.channels[job % nc];
                const bool is_master = slaved && m == *s.dsp.master_channel;
                const auto rx = is_master ? masters[job / nc] : receive_channel(s, mode, seed, m, &fps[job / nc]);
                if (sweep) {
                    for (int skip : s.sweep.skip_blocks) {
                        const auto cm = evaluate_channel(rx, s, skip);
                        sw[job].push_back({mode, seed, m, skip, cm.ber, cm.cpe_ops});
                    }
                    return;
                }
                CpeTrace zero;
                auto cm = evaluate_channel(rx, s, s.dsp.skip_blocks, &zero);
                if (slaved && !is_master) cm = slave_metrics(rx, s, master_traces[job / nc], cm);
                ch[job].push_back({mode, seed, s.dsp.skip_blocks, cm});
                if (std::find(s.trace_channels.begin(), s.trace_channels.end(), m) != s.trace_channels.end()) {
                    const auto u = unwrap(zero.phase_estimates);
                    for (std::size_t k = 0; k < u.size(); ++k) {
                        const double t = (static_cast<double>(zero.block_indices[k]) + 0.5) *
                                         static_cast<double>(zero.block_size) / zero.symbol_rate;
                        tr[job].push_back({mode, seed, m, t, u[k]});
                    }
                }
            });
            for (auto& v : ch) out.channels.insert(out.channels.end(), v.begin(), v.end());
            for (auto& v : sw) out.sweep.insert(out.sweep.end(), v.begin(), v.end());
            for (auto& v : tr) out.traces.insert(out.traces.end(), v.begin(), v.end());
            break;
        }
        case Experiment::MasterSlave: {
            const auto& spec = s.master_slave;
            std::vector<int> lines{spec.master};
            lines.insert(lines.end(), spec.slaves.begin(), spec.slaves.end());
            const auto fps = all_frame_phases(s, ms, lines, threads);
            out.out_of_lock_samples = count_out_of_lock(s, ms, fps);
            std::vector<std::vector<MasterSlaveRow>> rows(ms.size());
            parallel_for(ms.size(), threads, [&](std::size_t job) {
                const auto& [mode, seed] = ms[job];
                const auto master = receive_channel(s, mode, seed, spec.master, &fps[job]);
                std::vector<ChannelRx> slaves;
                for (int m : spec.slaves) slaves.push_back(receive_channel(s, mode, seed, m, &fps[job]));
                for (int skip : spec.skip_blocks) {
                    DspConfig d = s.dsp;
                    d.skip_blocks = skip;
                    const auto mres = cpe_pilot_block(master.symbols, master.frame.symbols, d, s.mod.baud);
                    const auto mber = ber(master.frame.bits, qam16_demap(mres.corrected));
                    rows[job].push_back({mode, seed, spec.master, spec.master, skip, mber, mber, 0.0});
                    for (const auto& sl : slaves) {
                        const auto ind = cpe_pilot_block(sl.symbols, sl.frame.symbols, d, s.mod.baud);
                        const auto scaled = cpe_master_slave(mres.trace, spec.master, sl.m);
                        const double off = calibrate_slave_offset(sl.symbols, sl.frame.symbols, scaled, spec.calibration_blocks);
                        const auto st = cpe_master_slave(mres.trace, spec.master, sl.m, off);
                        rows[job].push_back({mode, seed, sl.m, spec.master, skip,
                                             ber(sl.frame.bits, qam16_demap(ind.corrected)),
                                             ber(sl.frame.bits, qam16_demap(apply_cpe(sl.symbols, st))), off});
                    }
                }
            });
            for (auto& v : rows) out.master_slave.insert(out.master_slave.end(), v.begin(), v.end());
            break;
        }
        case Experiment::BeatNotes: {
            std::vector<std::vector<BeatRow>> rows(ms.size());
            parallel_for(ms.size(), threads,
                         [&](std::size_t k) { rows[k] = beat_note_job(s, ms[k].mode, ms[k].seed); });
            for (auto& v : rows)
                for (auto& r : v) out.beat_notes.push_back(std::move(r));
            break;
        }
        case Experiment::Allan: {
            std::vector<std::vector<AllanRow>> rows(ms.size());
            parallel_for(ms.size(), threads, [&](std::size_t k) { rows[k] = allan_job(s, ms[k].mode, ms[k].seed); });
            for (auto& v : rows) out.allan.insert(out.allan.end(), v.begin(), v.end());
            break;
        }
        case Experiment::Xpm: out.xpm = xpm_job(s, s.seeds.front()); break;
        case Experiment::CpeOps:
            for (const auto& c : s.cpe_ops.cases) {
                DspConfig d = s.dsp;
                d.skip_blocks = c.skip_blocks;
                d.master_channel = c.master_slave ? std::optional<int>(s.master_slave.master) : std::nullopt;
                const std::size_t blocks = (s.cpe_ops.frame_length + d.cpe_block - 1) / d.cpe_block;
                out.cpe_ops.push_back(
                    {c.skip_blocks, c.channels, c.master_slave, blocks, cpe_op_count(d, s.cpe_ops.frame_length, c.channels)});
            }
            break;
    }
    return out;
}

}  // namespace combsim
