#include "combsim/locking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace combsim {

void LockConfig::validate(double control_rate) const {
    if (locked_index == 0) throw Error("locked_index must be nonzero", "locked_index");
    if (!(f_ref > 0.0)) throw Error("f_ref must be positive", "f_ref");
    if (!(loop_bandwidth > 0.0)) throw Error("loop_bandwidth must be positive", "loop_bandwidth");
    if (!(loop_bandwidth < control_rate / 10.0))
        throw Error("loop_bandwidth must be below control_rate / 10", "loop_bandwidth");
    if (!(actuator_range > 0.0)) throw Error("actuator_range must be positive", "actuator_range");
    if (!(phase_margin_deg > 0.0 && phase_margin_deg < 90.0))
        throw Error("phase_margin_deg must lie in (0, 90)", "phase_margin_deg");
    if (!(lock_threshold > 0.0)) throw Error("lock_threshold must be positive", "lock_threshold");
    if (!(detector_noise_psd >= 0.0)) throw Error("detector_noise_psd must be >= 0", "detector_noise_psd");
    if (!(f_ref < comparator_bandwidth))
        throw Error("locked beat f_ref exceeds the phase comparator bandwidth", "f_ref");
}

bool LockResidual::all_locked() const {
    return std::all_of(locked.begin(), locked.end(), [](std::uint8_t f) { return f != 0; });
}

ServoGains design_pi_gains(const LockConfig& cfg, double control_rate) {
    const double wt = kTwoPi * cfg.loop_bandwidth / control_rate;  // crossover in rad/sample
    const double pm = cfg.phase_margin_deg * kPi / 180.0;
    // Plant N 2piT / (z - 1) lags pi/2 + wt/2; PI zero term 1 + a e^{-j psi}.
    const double psi = kPi / 2.0 - wt / 2.0;
    const double beta = kPi / 2.0 - wt / 2.0 - pm;
    if (!(beta > 0.0)) throw Error("loop_bandwidth too high for the requested phase margin", "loop_bandwidth");
    const double tb = std::tan(beta);
    const double a = tb / (std::sin(psi) - tb * std::cos(psi));
    const double two_sin = 2.0 * std::sin(wt / 2.0);
    const double plant_mag = std::abs(cfg.locked_index) * kTwoPi / control_rate / two_sin;
    const double pi_mag = std::abs(1.0 + a * std::polar(1.0, -psi));
    const double sign = cfg.locked_index > 0 ? 1.0 : -1.0;
    const double kp = sign / (plant_mag * pi_mag);
    return {kp, a * kp * two_sin};
}

LockServo::LockServo(const LockConfig& cfg, double control_rate, std::uint64_t detector_seed, double static_actuation)
    : cfg_(cfg),
      rate_(control_rate),
      gains_(design_pi_gains(cfg, control_rate)),
      detector_sigma_(std::sqrt(cfg.detector_noise_psd * control_rate)),
      static_actuation_(static_actuation),
      detector_(detector_seed) {}

LockServo::Sample LockServo::step(double open_loop_phase) {
    const double dphi = open_loop_phase - cfg_.locked_index * correction_;
    const double measured = dphi + (detector_sigma_ > 0.0 ? detector_sigma_ * detector_.normal() : 0.0);
    integrator_ += gains_.ki * measured;
    double dynamic = gains_.kp * measured + integrator_;
    double total = static_actuation_ + dynamic;
    bool in_range = true;
    if (std::abs(total) > cfg_.actuator_range) {
        in_range = false;
        total = std::clamp(total, -cfg_.actuator_range, cfg_.actuator_range);
        dynamic = total - static_actuation_;
        integrator_ = dynamic - gains_.kp * measured;  // anti-windup
    }
    Sample s{dphi, correction_, total, in_range && std::abs(dphi) <= cfg_.lock_threshold};
    correction_ += kTwoPi * dynamic / rate_;
    return s;
}

LockRun run_lock_servo(const PhaseTrajectory& open_loop_beat, const LockConfig& cfg, std::uint64_t detector_seed,
                       double static_actuation) {
    open_loop_beat.validate();
    cfg.validate(open_loop_beat.sample_rate);
    const std::size_t n = open_loop_beat.size();
    LockRun run;
    run.residual.delta_phi = zero_trajectory(n, open_loop_beat.sample_rate, open_loop_beat.t0);
    run.residual.locked.assign(n, 1);
    run.rx_rep_correction = zero_trajectory(n, open_loop_beat.sample_rate, open_loop_beat.t0);
    run.actuation.assign(n, static_actuation);
    if (!cfg.enabled) return run;

    LockServo servo(cfg, open_loop_beat.sample_rate, detector_seed, static_actuation);
    for (std::size_t k = 0; k < n; ++k) {
        const auto s = servo.step(open_loop_beat.samples[k]);
        run.residual.delta_phi.samples[k] = s.delta_phi;
        run.residual.locked[k] = s.locked ? 1 : 0;
        run.rx_rep_correction.samples[k] = s.correction;
        run.actuation[k] = s.actuation;
    }
    return run;
}

// ---------------------------------------------------------------------------

const PhaseTrajectory& TxCombPhases::ff_of(int m) const {
    auto it = ff.find(m);
    if (it == ff.end()) throw Error("no fiber fluctuation trajectory for line " + std::to_string(m), "ff");
    return it->second;
}

PhaseTrajectory TxCombPhases::nl_of(int m) const {
    if (auto it = nl.find(m); it != nl.end()) return it->second;
    return zero_trajectory(pump_int.size(), pump_int.sample_rate, pump_int.t0);
}

bool TxCombPhases::has_nonlinear() const { return !nl.empty(); }

LinePhaseDecomposition TxCombPhases::decompose(int m) const {
    return {pump_int, ff_of(m), nl_of(m), static_cast<double>(m) * rep_fundamental};
}

LinePhaseDecomposition RxCombPhases::decompose(int m) const {
    const auto zero = zero_trajectory(conveyed_pump.size(), conveyed_pump.sample_rate, conveyed_pump.t0);
    return {conveyed_pump, zero, zero, static_cast<double>(m) * rep_fundamental};
}

PhaseTrajectory open_loop_locked_beat(const TxCombPhases& tx, const PhaseTrajectory& rx_rep_free,
                                      const PhaseTrajectory& conveyed_pump, int locked_index) {
    const auto tx_line = compose_line_phase(tx.decompose(locked_index));
    RxCombPhases rx{conveyed_pump, rx_rep_free};
    return tx_line - compose_line_phase(rx.decompose(locked_index));
}

double nominal_offset(int m, const LockConfig& cfg) {
    return static_cast<double>(m) * cfg.f_ref / static_cast<double>(cfg.locked_index);
}

InterCombPhase compose_inter_comb_phase(int m, const TxCombPhases& tx, const RxCombPhases& rx,
                                        const LockResidual& residual, const LockConfig& cfg) {
    InterCombPhase out;
    out.m = m;
    out.nominal_offset = nominal_offset(m, cfg);
    if (!cfg.enabled) {
        out.phase = compose_line_phase(tx.decompose(m)) - compose_line_phase(rx.decompose(m));
        return out;
    }

    const int lock = cfg.locked_index;
    const double ratio = static_cast<double>(m) / static_cast<double>(lock);
    const auto& ff_m = tx.ff_of(m);
    const auto& ff_0 = tx.ff_of(0);
    const auto& ff_l = tx.ff_of(lock);
    require_aligned(ff_m, residual.delta_phi, "compose_inter_comb_phase");
    require_aligned(ff_0, ff_l, "compose_inter_comb_phase");
    require_aligned(ff_m, ff_0, "compose_inter_comb_phase");

    out.phase = residual.delta_phi;
    auto& p = out.phase.samples;
    if (!tx.has_nonlinear()) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double walk = ff_m.samples[k] - ff_0.samples[k];
            const double locked_walk = ff_l.samples[k] - ff_0.samples[k];
            p[k] = walk - ratio * locked_walk + ratio * residual.delta_phi.samples[k];
        }
    } else {
        const auto nl_m = tx.nl_of(m);
        const auto nl_0 = tx.nl_of(0);
        const auto nl_l = tx.nl_of(lock);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double dp = ff_m.samples[k] + nl_m.samples[k] - ff_0.samples[k] - nl_0.samples[k];
            const double dl = ratio * (ff_l.samples[k] + nl_l.samples[k] - ff_0.samples[k] - nl_0.samples[k]);
            p[k] = dp - dl + ratio * residual.delta_phi.samples[k];
        }
    }
    return out;
}

ComplexWaveform beat_note(const PhaseTrajectory& tx_line_phase, const PhaseTrajectory& rx_line_phase, double offset,
                          double rate, std::size_t n) {
    require_aligned(tx_line_phase, rx_line_phase, "beat_note");
    if (!(rate > 0.0)) throw Error("rate must be positive", "rate");
    if (!(std::abs(offset) < rate / 2.0)) throw Error("beat offset must lie inside +-rate/2", "offset");
    const auto diff = tx_line_phase - rx_line_phase;
    const auto phase = (rate == diff.sample_rate && n == diff.size()) ? diff : resample_linear(diff, rate, n, diff.t0);
    ComplexWaveform w;
    w.sample_rate = rate;
    w.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        w.samples[k] = std::polar(1.0, kTwoPi * offset * t + phase.samples[k]);
    }
    return w;
}

}  // namespace combsim
