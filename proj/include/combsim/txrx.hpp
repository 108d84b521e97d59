#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "combsim/waveform.hpp"

namespace combsim {

enum class ModFormat { QAM16 };
enum class PulseShape { Rectangle };

struct ModulationConfig {
    double baud = 12.5e9;
    ModFormat format = ModFormat::QAM16;
    PulseShape pulse_shape = PulseShape::Rectangle;
    int samples_per_symbol = 4;
    std::size_t frame_length = 400000;  // symbols
    std::size_t pilot_block = 32;       // symbols

    void validate() const;
    double sample_rate() const { return baud * samples_per_symbol; }
    std::size_t blocks() const { return frame_length / pilot_block; }
};

struct SymbolFrame {
    std::vector<cplx> symbols;
    std::vector<std::uint8_t> bits;  // one bit per entry, 4 per symbol
    int channel_index = 0;
};

// Gray table, per axis, first bit of the pair is the sign:
//   00 -> +1, 01 -> +3, 11 -> -3, 10 -> -1
// Bits b3 b2 choose I, b1 b0 choose Q, both scaled by 1/sqrt(10).
// So 0000 -> (1 + 1i)/sqrt(10) and 1111 -> (-3 - 3i)/sqrt(10).

std::vector<std::uint8_t> random_bits(std::size_t n, std::uint64_t seed);

SymbolFrame qam16_mod(std::span<const std::uint8_t> bits, int channel_index = 0);

/// Minimum-distance decision per axis with thresholds at -2, 0, +2 (in units of
/// 1/sqrt(10)). A sample exactly on a threshold goes to the lower level.
std::vector<std::uint8_t> qam16_demap(std::span<const cplx> symbols);

/// Hard decision back onto the constellation.
std::vector<cplx> qam16_decide(std::span<const cplx> symbols);

/// Rectangle-shaped symbols at cfg.sample_rate() times exp(i carrier_phase).
/// carrier_phase must already sit on the waveform grid (same rate, one sample
/// per output sample).
ComplexWaveform modulate_line(const SymbolFrame& frame, const ModulationConfig& cfg,
                              const PhaseTrajectory& carrier_phase);

/// signal * exp(-i (2 pi lo_offset t + lo_phase(t))), t = k / rate.
ComplexWaveform coherent_mix(const ComplexWaveform& signal, const PhaseTrajectory& lo_phase, double lo_offset);

/// I' = c I + s Q, Q' = s I + c Q with c = cos(skew/2), s = sin(skew/2), then
/// I' scaled by sqrt(g) and Q' by 1/sqrt(g), g = 10^(amp_db/20). A unit
/// tone exp(i w t) acquires an image at -w of relative amplitude tan(skew/2)
/// when amp_db = 0.
ComplexWaveform add_iq_imbalance(const ComplexWaveform& w, double amp_imbalance_db, double phase_skew);

/// Integrate-and-dump over each symbol (block mean of samples_per_symbol samples).
std::vector<cplx> matched_filter(const ComplexWaveform& w, int samples_per_symbol);

// Fixture format: CSV with header "index,bits,re,im", one row per symbol,
// bits as four characters b3b2b1b0, re/im printed with 17 significant digits.
void write_frame_csv(std::ostream& os, const SymbolFrame& frame);
SymbolFrame read_frame_csv(std::istream& is, int channel_index = 0);

}  // namespace combsim
