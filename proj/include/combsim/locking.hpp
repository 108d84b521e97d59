#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "combsim/comb.hpp"
#include "combsim/rng.hpp"
#include "combsim/waveform.hpp"

namespace combsim {

enum class LoopType { PI };

struct LockConfig {
    int locked_index = 17;
    double f_ref = 941.101000e6;         // Hz
    double loop_bandwidth = 100.0e3;     // Hz, open-loop unity-gain frequency
    LoopType loop_type = LoopType::PI;
    double actuator_range = 10.0e6;      // Hz of repetition-rate pull
    bool enabled = true;
    double phase_margin_deg = 60.0;
    double lock_threshold = 0.1;         // rad; |dphi| above this clears the in-lock flag
    double detector_noise_psd = 1.0e-10; // rad^2/Hz, two-sided, white phase-comparator noise
    double comparator_bandwidth = 1.0e9; // Hz; the locked beat must sit below it

    void validate(double control_rate) const;
};

/// Residual servo phase error at the locked line plus the per-sample in-lock flag.
struct LockResidual {
    PhaseTrajectory delta_phi;
    std::vector<std::uint8_t> locked;

    bool all_locked() const;
};

struct LockRun {
    LockResidual residual;
    PhaseTrajectory rx_rep_correction;  // rad, added to the receiver's fundamental rep-rate phase
    std::vector<double> actuation;      // Hz, total rep-rate pull applied each sample
};

struct ServoGains {
    double kp;  // Hz per rad
    double ki;  // Hz per rad per sample
};

/// Discrete PI gains for the loop phase = N * 2 pi * integral(u): unity gain at
/// loop_bandwidth and the configured phase margin, including the one-sample
/// actuation delay at `control_rate`.
ServoGains design_pi_gains(const LockConfig& cfg, double control_rate);

/// Sample-by-sample servo that pulls the receiver repetition rate so the locked
/// line beats at f_ref. The open-loop phase fed to step() is the locked-line
/// beat phase (relative to f_ref * t) the receiver would show with no feedback.
class LockServo {
public:
    LockServo(const LockConfig& cfg, double control_rate, std::uint64_t detector_seed,
              double static_actuation = 0.0);

    struct Sample {
        double delta_phi;
        double correction;  // rad on the receiver fundamental, applied at this sample
        double actuation;   // Hz
        bool locked;
    };

    Sample step(double open_loop_phase);
    const ServoGains& gains() const noexcept { return gains_; }

private:
    LockConfig cfg_;
    double rate_;
    ServoGains gains_;
    double detector_sigma_;
    double static_actuation_;
    double integrator_ = 0.0;
    double correction_ = 0.0;
    Rng detector_;
};

LockRun run_lock_servo(const PhaseTrajectory& open_loop_beat, const LockConfig& cfg, std::uint64_t detector_seed,
                       double static_actuation = 0.0);

/// Transmitter-side line phases as they arrive at the receiver.
struct TxCombPhases {
    PhaseTrajectory pump_int;                 // intrinsic pump phase
    PhaseTrajectory rep_fundamental;          // phi_rep(1)
    std::map<int, PhaseTrajectory> ff;        // fiber fluctuation per line
    std::map<int, PhaseTrajectory> nl;        // nonlinear phase per line; empty means zero

    const PhaseTrajectory& ff_of(int m) const;
    PhaseTrajectory nl_of(int m) const;
    bool has_nonlinear() const;
    LinePhaseDecomposition decompose(int m) const;
};

/// Receiver comb: every line rides on the conveyed pump.
struct RxCombPhases {
    PhaseTrajectory conveyed_pump;
    PhaseTrajectory rep_fundamental;  // free-running jitter plus servo correction

    LinePhaseDecomposition decompose(int m) const;
};

struct InterCombPhase {
    int m = 0;
    PhaseTrajectory phase;       // phi_tx(m) - phi_rx(m), nominal offset removed
    double nominal_offset = 0.0; // Hz, f_rx(m) - f_tx(m)
};

/// Open-loop beat phase of the locked line: what run_lock_servo consumes.
PhaseTrajectory open_loop_locked_beat(const TxCombPhases& tx, const PhaseTrajectory& rx_rep_free,
                                      const PhaseTrajectory& conveyed_pump, int locked_index);

/// m * f_ref / locked_index.
double nominal_offset(int m, const LockConfig& cfg);

/// Inter-comb phase of line m. With the lock enabled this is the three-term
/// residual (fiber terms plus m * dphi / N), using the general form when any
/// nonlinear phase is present. With the lock disabled it is the raw difference
/// of the composed transmitter and receiver line phases.
InterCombPhase compose_inter_comb_phase(int m, const TxCombPhases& tx, const RxCombPhases& rx,
                                        const LockResidual& residual, const LockConfig& cfg);

/// exp(i (2 pi offset t + tx - rx)) on n samples at `rate`.
ComplexWaveform beat_note(const PhaseTrajectory& tx_line_phase, const PhaseTrajectory& rx_line_phase, double offset,
                          double rate, std::size_t n);

}  // namespace combsim
