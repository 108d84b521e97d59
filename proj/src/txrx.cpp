#include "combsim/txrx.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "combsim/rng.hpp"

namespace combsim {

namespace {

const double kScale = 1.0 / std::sqrt(10.0);

double axis_level(std::uint8_t sign_bit, std::uint8_t mag_bit) {
    const double mag = mag_bit ? 3.0 : 1.0;
    return sign_bit ? -mag : mag;
}

void axis_bits(double v, std::uint8_t& sign_bit, std::uint8_t& mag_bit) {
    // Levels -3, -1, +1, +3; ties resolve to the lower level.
    if (v <= -2.0) {
        sign_bit = 1, mag_bit = 1;
    } else if (v <= 0.0) {
        sign_bit = 1, mag_bit = 0;
    } else if (v <= 2.0) {
        sign_bit = 0, mag_bit = 0;
    } else {
        sign_bit = 0, mag_bit = 1;
    }
}

}  // namespace

void ModulationConfig::validate() const {
    if (!(baud > 0.0)) throw Error("baud must be positive", "baud");
    if (samples_per_symbol < 2) throw Error("samples_per_symbol must be >= 2", "samples_per_symbol");
    if (frame_length == 0) throw Error("frame_length must be positive", "frame_length");
    if (pilot_block == 0) throw Error("pilot_block must be positive", "pilot_block");
    if (frame_length % pilot_block != 0)
        throw Error("frame_length must be divisible by pilot_block", "frame_length");
}

std::vector<std::uint8_t> random_bits(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> out(n);
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % 64 == 0) word = rng.bits();
        out[k] = static_cast<std::uint8_t>((word >> (k % 64)) & 1u);
    }
    return out;
}

SymbolFrame qam16_mod(std::span<const std::uint8_t> bits, int channel_index) {
    if (bits.empty()) throw Error("qam16_mod needs at least one nibble", "bits");
    if (bits.size() % 4 != 0) throw Error("bit count must be a multiple of 4", "bits");
    SymbolFrame f;
    f.channel_index = channel_index;
    f.bits.assign(bits.begin(), bits.end());
    f.symbols.resize(bits.size() / 4);
    for (std::size_t s = 0; s < f.symbols.size(); ++s) {
        const auto* b = &bits[4 * s];
        f.symbols[s] = kScale * cplx(axis_level(b[0] & 1u, b[1] & 1u), axis_level(b[2] & 1u, b[3] & 1u));
    }
    return f;
}

std::vector<std::uint8_t> qam16_demap(std::span<const cplx> symbols) {
    if (symbols.empty()) throw Error("qam16_demap needs at least one symbol", "symbols");
    std::vector<std::uint8_t> out(4 * symbols.size());
    const double inv = std::sqrt(10.0);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        axis_bits(symbols[s].real() * inv, out[4 * s], out[4 * s + 1]);
        axis_bits(symbols[s].imag() * inv, out[4 * s + 2], out[4 * s + 3]);
    }
    return out;
}

std::vector<cplx> qam16_decide(std::span<const cplx> symbols) {
    return qam16_mod(qam16_demap(symbols)).symbols;
}

ComplexWaveform modulate_line(const SymbolFrame& frame, const ModulationConfig& cfg,
                              const PhaseTrajectory& carrier_phase) {
    cfg.validate();
    const auto sps = static_cast<std::size_t>(cfg.samples_per_symbol);
    const std::size_t n = frame.symbols.size() * sps;
    if (carrier_phase.sample_rate != cfg.sample_rate())
        throw Error("carrier phase rate differs from the waveform rate", "carrier_phase");
    if (carrier_phase.size() != n) throw Error("carrier phase length differs from the waveform length", "carrier_phase");
    ComplexWaveform w;
    w.sample_rate = cfg.sample_rate();
    w.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) w.samples[k] = frame.symbols[k / sps] * std::polar(1.0, carrier_phase.samples[k]);
    return w;
}

ComplexWaveform coherent_mix(const ComplexWaveform& signal, const PhaseTrajectory& lo_phase, double lo_offset) {
    if (lo_phase.sample_rate != signal.sample_rate) throw Error("LO phase rate differs from the signal rate", "lo_phase");
    if (lo_phase.size() != signal.size()) throw Error("LO phase length differs from the signal length", "lo_phase");
    ComplexWaveform out = signal;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double cycles = lo_offset * static_cast<double>(k) / signal.sample_rate;
        const double ph = kTwoPi * (cycles - std::floor(cycles)) + lo_phase.samples[k];
        out.samples[k] *= std::polar(1.0, -ph);
    }
    out.center_offset = signal.center_offset + lo_offset;
    return out;
}

ComplexWaveform add_iq_imbalance(const ComplexWaveform& w, double amp_imbalance_db, double phase_skew) {
    if (!std::isfinite(amp_imbalance_db)) throw Error("amplitude imbalance must be finite", "amp_imbalance");
    if (!std::isfinite(phase_skew)) throw Error("phase skew must be finite", "phase_skew");
    const double c = std::cos(phase_skew / 2.0);
    const double s = std::sin(phase_skew / 2.0);
    const double g = std::sqrt(std::pow(10.0, amp_imbalance_db / 20.0));
    ComplexWaveform out = w;
    for (auto& v : out.samples) {
        const double i = v.real(), q = v.imag();
        v = cplx(g * (c * i + s * q), (s * i + c * q) / g);
    }
    return out;
}

std::vector<cplx> matched_filter(const ComplexWaveform& w, int samples_per_symbol) {
    if (samples_per_symbol < 1) throw Error("samples_per_symbol must be positive", "samples_per_symbol");
    const auto sps = static_cast<std::size_t>(samples_per_symbol);
    if (w.size() % sps != 0) throw Error("waveform length is not a whole number of symbols", "samples");
    std::vector<cplx> out(w.size() / sps);
    for (std::size_t s = 0; s < out.size(); ++s) {
        cplx acc{};
        for (std::size_t k = 0; k < sps; ++k) acc += w.samples[s * sps + k];
        out[s] = acc / static_cast<double>(sps);
    }
    return out;
}

void write_frame_csv(std::ostream& os, const SymbolFrame& frame) {
    if (frame.bits.size() != 4 * frame.symbols.size()) throw Error("frame bits do not match its symbols", "bits");
    os << "index,bits,re,im\n";
    char buf[128];
    for (std::size_t s = 0; s < frame.symbols.size(); ++s) {
        std::snprintf(buf, sizeof buf, "%zu,%u%u%u%u,%.17g,%.17g\n", s, frame.bits[4 * s], frame.bits[4 * s + 1],
                      frame.bits[4 * s + 2], frame.bits[4 * s + 3], frame.symbols[s].real(), frame.symbols[s].imag());
        os << buf;
    }
}

SymbolFrame read_frame_csv(std::istream& is, int channel_index) {
    std::string line;
    if (!std::getline(is, line) || line != "index,bits,re,im") throw Error("bad fixture header", "header");
    SymbolFrame f;
    f.channel_index = channel_index;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string idx, bits, re, im;
        if (!std::getline(ls, idx, ',') || !std::getline(ls, bits, ',') || !std::getline(ls, re, ',') ||
            !std::getline(ls, im))
            throw Error("malformed fixture row " + std::to_string(row), "rows");
        if (bits.size() != 4) throw Error("fixture bits must have four characters", "bits");
        for (char c : bits) {
            if (c != '0' && c != '1') throw Error("fixture bits must be 0 or 1", "bits");
            f.bits.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        f.symbols.emplace_back(std::stod(re), std::stod(im));
        ++row;
    }
    if (f.symbols.empty()) throw Error("fixture holds no symbols", "rows");
    return f;
}

}  // namespace combsim
