#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "combsim/dsp.hpp"
#include "combsim/waveform.hpp"

namespace combsim {

struct BerCount {
    std::size_t errors = 0;
    std::size_t bits = 0;
    double ratio() const { return bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0; }
};

BerCount ber(std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits);

/// RMS error vector over RMS reference, in percent.
double evm_pct(std::span<const cplx> rx, std::span<const cplx> ref);

/// Reference power over error power, in dB.
double snr_db(std::span<const cplx> rx, std::span<const cplx> ref);

/// Two-sided PSD on ascending frequencies (W/Hz for a waveform in sqrt(W)).
struct Psd {
    std::vector<double> freq;
    std::vector<double> density;
    double rbw = 0.0;  // bin spacing, Hz
    double enbw = 0.0; // equivalent noise bandwidth of the window, Hz
};

/// Welch estimate: Hann window, 50 % overlap, segment length round(rate / rbw).
/// The density integrates to the mean power.
Psd psd_welch(const ComplexWaveform& w, double rbw);

struct Fwhm {
    double hz = 0.0;
    double rbw = 0.0;
    bool resolution_limited = false;  // width below 2 bins
};

/// Full width at -3 dB around the peak, crossings interpolated linearly in dB.
Fwhm fwhm(const Psd& psd);

/// Mean density over |f - f_peak| in [lo, hi].
double plateau_level(const Psd& psd, double lo, double hi);

/// Frequency counter with zero dead time: (phi[k + d] - phi[k]) / (2 pi tau0),
/// d = round(tau0 * rate), one reading per tau0.
std::vector<double> frequency_series_from_phase(std::span<const double> phase, double rate, double tau0);

/// Overlapping Allan deviation of a frequency series sampled every tau0. Gates
/// must be integer multiples of tau0. With x the integrated phase (time error
/// in Hz s) and tau = n tau0:
///   sigma^2(tau) = sum_k (x[k + 2n] - 2 x[k + n] + x[k])^2 / (2 tau^2 (M - 2n))
/// where M is the number of x samples.
std::vector<double> allan_deviation(std::span<const double> freq, double tau0, std::span<const double> gates);

/// ceil(blocks / (i + 1)) per estimating channel; with a master only the
/// master estimates.
std::size_t cpe_op_count(const DspConfig& cfg, std::size_t frame_length, std::size_t channels);

struct ChannelMetrics {
    int m = 0;
    BerCount ber;
    double snr_db = 0.0;
    double evm_pct = 0.0;
    double foe_error_hz = 0.0;
    std::size_t cpe_ops = 0;
    std::size_t cycle_slips = 0;
};

struct BeatNoteMetrics {
    int m = 0;
    Fwhm fwhm;
    double plateau = 0.0;
    Psd psd;
};

struct AllanMetrics {
    std::vector<double> gate_times_s;
    std::vector<double> deviations;
};

struct MetricsReport {
    std::vector<ChannelMetrics> per_channel;
    std::vector<BeatNoteMetrics> beat_notes;
    AllanMetrics allan;
};

}  // namespace combsim
