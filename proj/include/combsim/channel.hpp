#pragma once

#include <cstdint>
#include <vector>

#include "combsim/comb.hpp"
#include "combsim/waveform.hpp"

namespace combsim {

/// Fiber link. Fields use the units named in the comments; defaults describe
/// 50 km of standard single-mode fiber at 1550 nm.
struct LinkConfig {
    double length = 50.0e3;             // m
    double beta2 = -21.7e-27;           // s^2/m
    double beta3 = 0.0;                 // s^3/m, extension point
    double gamma = 1.3e-3;              // 1/(W m)
    double alpha = 0.2;                 // dB/km
    double launch_power_dbm = -10.0;    // per channel
    double ocnr_db = 40.0;              // optical carrier-to-noise ratio per carrier
    double ocnr_ref_bandwidth = 12.5e9; // Hz (0.1 nm)
    double ase_psd = 8.0e-19;           // W/Hz; 40 dB OCNR at -10 dBm in 12.5 GHz
    double rx_snr_db = 17.0;            // receiver electrical SNR at the symbol rate
    double reference_frequency = 193.414489e12;  // Hz, baseband DC of the shared grid (the pump)
    double grid_spacing = 100.53e9;     // Hz, line spacing used for walk-off
    double walkoff_decorrelation = 1.0e-3;  // rad of independent fiber phase per ns of walk-off
    PhaseNoiseParams fluct{};           // fiber_fluct_rms / fiber_fluct_corner drive phi_ff
    int split_steps = 500;

    void validate() const;
    double alpha_per_m() const;
};

/// Group delay of line m relative to the pump after the full link:
/// beta2 * L * 2 pi * m * grid_spacing (seconds).
double walkoff_delay(int m, const LinkConfig& cfg);

/// All-pass dispersion filter. The field uses the e^{+i omega t} convention,
/// so with FFT bin angular frequency w the transfer is
/// exp(-i (beta2/2 (w + w_off)^2 + beta3/6 (w + w_off)^3) L), and the group
/// delay at offset dw is beta2 L dw. w_off = 2 pi (line_abs_freq + center_offset - reference).
ComplexWaveform apply_dispersion(const ComplexWaveform& w, const LinkConfig& cfg, double line_abs_freq);

/// Inverse of apply_dispersion.
ComplexWaveform compensate_dispersion(const ComplexWaveform& w, const LinkConfig& cfg, double line_abs_freq);

/// Fiber phase fluctuation of line m: a low-pass process common to all lines
/// plus an independent low-pass component of RMS
/// walkoff_decorrelation * |walkoff_delay(m)| / 1 ns.
PhaseTrajectory synth_fiber_fluct(int m, const LinkConfig& cfg, std::size_t n, double rate, std::uint64_t seed);

/// Streaming form of synth_fiber_fluct; identical samples for the same inputs.
class FiberFluctSource {
public:
    FiberFluctSource(int m, const LinkConfig& cfg, double rate, std::uint64_t seed);
    double next() { return common_.next() + line_.next(); }

private:
    LowPassNoiseSource common_;
    LowPassNoiseSource line_;
};

/// Symmetric split-step integration of the scalar NLSE over the sum of the
/// channels. Each input carries its frequency (relative to cfg.reference_frequency)
/// in center_offset; all share rate and length. Outputs are demultiplexed back to
/// baseband with an ideal filter of half the nearest-neighbor spacing.
std::vector<ComplexWaveform> split_step_propagate(const std::vector<ComplexWaveform>& channels, const LinkConfig& cfg,
                                                  int steps = 0);

/// Noise loading target, either an OSNR in a reference bandwidth or an
/// absolute complex noise PSD.
struct NoiseTarget {
    enum class Kind { Osnr, Psd };
    Kind kind = Kind::Osnr;
    double value = 0.0;
    double ref_bandwidth = 12.5e9;

    static NoiseTarget osnr_db(double db, double ref_bw = 12.5e9) { return {Kind::Osnr, db, ref_bw}; }
    static NoiseTarget psd(double w_per_hz) { return {Kind::Psd, w_per_hz, 0.0}; }
};

/// Adds circular complex Gaussian noise. OSNR targets are relative to the
/// waveform's mean power.
ComplexWaveform add_noise(const ComplexWaveform& w, const NoiseTarget& target, std::uint64_t seed);

/// Multiplies by exp(i 2 pi f t), t = k / rate.
ComplexWaveform frequency_shift(const ComplexWaveform& w, double f);

}  // namespace combsim
