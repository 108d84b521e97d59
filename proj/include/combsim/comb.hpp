#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "combsim/rng.hpp"
#include "combsim/waveform.hpp"

namespace combsim {

enum class CombRole { Transmitter, Receiver };

/// Static description of one soliton comb. Line m sits at
/// pump_frequency + m * mode_spacing; line 0 is the pump.
struct CombSpec {
    double pump_frequency = 193.414489e12;  // c / 1550.0 nm
    double mode_spacing = 100.53e9;
    std::vector<int> line_indices;
    CombRole role = CombRole::Transmitter;

    double line_frequency(int m) const { return pump_frequency + m * mode_spacing; }
    bool has_line(int m) const;
    void require_line(int m) const;
    void validate() const;
};

/// Stochastic phase processes of a comb and of the fiber it traverses.
struct PhaseNoiseParams {
    double pump_linewidth = 100.0;        // Hz, Lorentzian FWHM of the pump
    double rep_rate_jitter_rms = 1.5e3;   // Hz, RMS of the repetition-rate jitter
    double rep_rate_corner = 100.0;       // Hz, corner of the jitter process
    double fiber_fluct_rms = 1.0;         // rad, common fiber phase fluctuation
    double fiber_fluct_corner = 3.0e3;    // Hz

    /// Throws unless all fields are >= 0 and both corners are below rate / 2.
    void validate(double rate) const;
};

/// Additive decomposition of the phase of one arrived comb line.
struct LinePhaseDecomposition {
    PhaseTrajectory phi_int;
    PhaseTrajectory phi_ff;
    PhaseTrajectory phi_nl;
    PhaseTrajectory phi_rep;
};

// Streaming generators. Each is a pure function of its seed and settings; the
// trajectory-level synth_* functions below just drain them.

/// Random-walk phase with per-step increment variance 2 pi linewidth / rate.
class WienerPhaseSource {
public:
    WienerPhaseSource(double linewidth, double rate, std::uint64_t seed);
    double next();

private:
    double step_sigma_;
    double phase_ = 0.0;
    Rng rng_;
};

/// Ornstein-Uhlenbeck frequency jitter (exact AR(1) discretization, started
/// from its stationary law) and its phase integral 2 pi sum(f) / rate.
class RepRateJitterSource {
public:
    RepRateJitterSource(double rms, double corner, double rate, std::uint64_t seed);
    /// Returns the phase of the fundamental line (m = 1), then advances.
    double next();
    double frequency() const noexcept { return freq_; }

private:
    double decay_;
    double drive_;
    double rate_;
    double freq_;
    double phase_ = 0.0;
    Rng rng_;
};

/// White noise through an 8th-order Butterworth low-pass, scaled so the
/// output has the requested RMS. Filter transients are flushed on construction.
class LowPassNoiseSource {
public:
    LowPassNoiseSource(double rms, double corner, double rate, std::uint64_t seed);
    double next();

private:
    struct Biquad {
        double b0, b1, b2, a1, a2;
        double z1 = 0.0, z2 = 0.0;
        double step(double x) {
            const double y = b0 * x + z1;
            z1 = b1 * x - a1 * y + z2;
            z2 = b2 * x - a2 * y;
            return y;
        }
    };
    std::array<Biquad, 4> sections_{};
    double input_sigma_ = 0.0;
    Rng rng_;
};

PhaseTrajectory synth_wiener_phase(double linewidth, std::size_t n, double rate, std::uint64_t seed);

/// m * phi_rep(1); phi_rep(1) depends only on (params, rate, seed), never on m.
PhaseTrajectory synth_rep_rate_phase(int m, const PhaseNoiseParams& params, std::size_t n, double rate,
                                     std::uint64_t seed);

/// Band-limited fluctuation with the given RMS and corner (used for fiber terms).
PhaseTrajectory synth_lowpass_phase(double rms, double corner, std::size_t n, double rate, std::uint64_t seed);

/// Pointwise phi_int + phi_ff + phi_nl + phi_rep.
PhaseTrajectory compose_line_phase(const LinePhaseDecomposition& d);

/// Phase of the pump as conveyed to the receiver; every receiver line's
/// intrinsic phase equals it.
PhaseTrajectory clone_pump_phase(const PhaseTrajectory& tx_pump, const PhaseTrajectory& link_ff,
                                 const PhaseTrajectory& link_nl);

PhaseTrajectory zero_trajectory(std::size_t n, double rate, double t0 = 0.0);

}  // namespace combsim
