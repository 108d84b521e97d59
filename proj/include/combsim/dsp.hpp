#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "combsim/channel.hpp"
#include "combsim/waveform.hpp"

namespace combsim {

enum class FoeMode { Precalc, FourthPower, None };
enum class EqualizerKind { None, LMS, Volterra2 };

struct DspConfig {
    std::size_t cpe_block = 32;   // symbols per block
    int skip_blocks = 0;          // i: one estimate per (i + 1) blocks
    FoeMode foe_mode = FoeMode::Precalc;
    std::optional<int> master_channel;
    EqualizerKind equalizer = EqualizerKind::None;
    int taps = 7;                 // linear taps (odd)
    int volterra_memory = 3;      // second-order kernel span (odd)
    double step_size = 0.05;      // NLMS step
    std::size_t training_symbols = 20000;

    /// Throws unless the block, skip, taps and master settings are consistent
    /// for `own_channel`.
    void validate(int own_channel) const;
};

/// Block-wise phase estimates and the per-symbol phase actually applied.
struct CpeTrace {
    std::vector<std::size_t> block_indices;
    std::vector<double> phase_estimates;  // rad, wrapped to (-pi, pi]
    std::vector<double> applied_phase;    // rad per symbol
    std::size_t block_size = 32;
    int skip_blocks = 0;
    double symbol_rate = 1.0;
};

struct CpeResult {
    CpeTrace trace;
    std::vector<cplx> corrected;
};

/// m * f_ref / locked_index.
double foe_precalc(int m, double f_ref, int locked_index);

/// Peak of |FFT(w^4)| divided by 4, refined by 3-point parabolic interpolation
/// on the magnitude. Raw resolution is rate / (4 N); the unambiguous range is
/// +-rate / 8. Needs at least 2^14 samples.
double foe_fourth_power(const ComplexWaveform& w);

/// Least-squares slope of the unwrapped estimates against block time, / 2 pi.
/// Block time is the block centre.
double residual_foe_from_slope(const CpeTrace& trace);

/// Pilot-block CPE. Blocks with index = 0 mod (skip + 1) are pilots: their
/// phase is arg(sum rx conj(pilot)), and it is held for that block and the
/// following `skip` blocks. `pilots` is indexed like `rx`; only pilot blocks are read.
CpeResult cpe_pilot_block(std::span<const cplx> rx, std::span<const cplx> pilots, const DspConfig& cfg,
                          double symbol_rate);

/// Slave trace: wrap((m_slave / m_master) * unwrap(master) + static_offset),
/// for both the estimates and the applied phase.
CpeTrace cpe_master_slave(const CpeTrace& master, int m_master, int m_slave, double static_offset = 0.0);

/// Static offset of a slave channel from its first `blocks` pilot blocks,
/// given the already scaled slave trace (built with static_offset = 0).
double calibrate_slave_offset(std::span<const cplx> rx, std::span<const cplx> pilots, const CpeTrace& scaled,
                              std::size_t blocks = 1);

/// rx * exp(-i applied_phase), symbol by symbol.
std::vector<cplx> apply_cpe(std::span<const cplx> rx, const CpeTrace& trace);

/// Standard +-pi unwrap.
std::vector<double> unwrap(std::span<const double> wrapped);
double wrap_phase(double x);

/// Adjacent estimate steps with |wrapped difference| > pi / 2.
std::size_t count_cycle_slips(const CpeTrace& trace);

/// Gram-Schmidt orthogonalization: I normalized, Q made orthogonal to I and
/// normalized, each rail carrying half the input power.
ComplexWaveform gram_schmidt_iq(const ComplexWaveform& w);

/// Inverse of apply_dispersion.
ComplexWaveform cd_compensate(const ComplexWaveform& w, const LinkConfig& cfg, double line_abs_freq);

/// Pilot-trained NLMS equalizer: linear FIR of `taps` taps plus, for
/// Volterra2, the kernel sum_ij k_ij x[n-i] |x[n-j]|^2 over volterra_memory
/// symbols. The first training_symbols symbols of `pilots` train the filter.
struct EqualizerModel {
    EqualizerKind kind = EqualizerKind::None;
    int taps = 1;
    int memory = 0;
    std::vector<cplx> linear;
    std::vector<cplx> kernel;             // memory x memory, row-major
    std::vector<double> training_mse;     // per 1000-symbol training window

    std::vector<cplx> apply(std::span<const cplx> x) const;
};

/// Throws Error when a 1000-symbol training window has more than 10x the
/// error of the first window (or a non-finite error).
EqualizerModel train_equalizer(std::span<const cplx> rx, std::span<const cplx> pilots, const DspConfig& cfg);

std::vector<cplx> equalize(std::span<const cplx> rx, std::span<const cplx> pilots, const DspConfig& cfg);

}  // namespace combsim
