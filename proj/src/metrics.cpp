#include "combsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "combsim/fft.hpp"

namespace combsim {

BerCount ber(std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits) {
    if (tx_bits.size() != rx_bits.size()) throw Error("bit sequences differ in length", "bits");
    BerCount c;
    c.bits = tx_bits.size();
    for (std::size_t k = 0; k < c.bits; ++k) c.errors += ((tx_bits[k] ^ rx_bits[k]) & 1u);
    return c;
}

namespace {

std::pair<double, double> error_and_ref_power(std::span<const cplx> rx, std::span<const cplx> ref) {
    if (rx.size() != ref.size() || rx.empty()) throw Error("symbol sequences must be nonempty and equal length", "symbols");
    double err = 0.0, pr = 0.0;
    for (std::size_t k = 0; k < rx.size(); ++k) {
        err += std::norm(rx[k] - ref[k]);
        pr += std::norm(ref[k]);
    }
    return {err, pr};
}

}  // namespace

double evm_pct(std::span<const cplx> rx, std::span<const cplx> ref) {
    const auto [err, pr] = error_and_ref_power(rx, ref);
    return 100.0 * std::sqrt(err / pr);
}

double snr_db(std::span<const cplx> rx, std::span<const cplx> ref) {
    const auto [err, pr] = error_and_ref_power(rx, ref);
    return 10.0 * std::log10(pr / err);
}

Psd psd_welch(const ComplexWaveform& w, double rbw) {
    if (!(rbw > 0.0)) throw Error("rbw must be positive", "rbw");
    const auto nseg = static_cast<std::size_t>(std::llround(w.sample_rate / rbw));
    if (nseg < 4 || nseg > w.size()) throw Error("rbw is finer than the record allows", "rbw");
    std::vector<double> win(nseg);
    double wsum2 = 0.0, wsum = 0.0;
    for (std::size_t k = 0; k < nseg; ++k) {
        win[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(nseg));
        wsum2 += win[k] * win[k];
        wsum += win[k];
    }
    const std::size_t hop = nseg / 2;
    std::vector<double> acc(nseg, 0.0);
    std::vector<cplx> buf(nseg);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + nseg <= w.size(); start += hop) {
        for (std::size_t k = 0; k < nseg; ++k) buf[k] = w.samples[start + k] * win[k];
        fft::forward(buf);
        for (std::size_t k = 0; k < nseg; ++k) acc[k] += std::norm(buf[k]);
        ++segments;
    }
    Psd p;
    p.rbw = w.sample_rate / static_cast<double>(nseg);
    p.enbw = w.sample_rate * wsum2 / (wsum * wsum);
    p.freq.resize(nseg);
    p.density.resize(nseg);
    const double scale = 1.0 / (static_cast<double>(segments) * w.sample_rate * wsum2);
    const std::size_t neg = nseg / 2;  // bins mapped below zero
    for (std::size_t j = 0; j < nseg; ++j) {
        const std::size_t k = (j + nseg - neg) % nseg;
        p.freq[j] = fft::bin_frequency(k, nseg, w.sample_rate) + w.center_offset;
        p.density[j] = acc[k] * scale;
    }
    return p;
}

Fwhm fwhm(const Psd& psd) {
    if (psd.density.size() < 3) throw Error("PSD too short for a width", "psd");
    const auto peak = static_cast<std::size_t>(
        std::max_element(psd.density.begin(), psd.density.end()) - psd.density.begin());
    const double pk = psd.density[peak];
    if (!(pk > 0.0)) throw Error("PSD has no positive peak", "psd");
    const double half_db = 10.0 * std::log10(pk) - 3.0103;
    const auto db = [&](std::size_t k) { return 10.0 * std::log10(std::max(psd.density[k], 1e-300)); };

    double left = psd.freq.front(), right = psd.freq.back();
    for (std::size_t k = peak; k > 0; --k) {
        if (db(k - 1) <= half_db) {
            const double t = (db(k) - half_db) / (db(k) - db(k - 1));
            left = psd.freq[k] - t * (psd.freq[k] - psd.freq[k - 1]);
            break;
        }
    }
    for (std::size_t k = peak; k + 1 < psd.density.size(); ++k) {
        if (db(k + 1) <= half_db) {
            const double t = (db(k) - half_db) / (db(k) - db(k + 1));
            right = psd.freq[k] + t * (psd.freq[k + 1] - psd.freq[k]);
            break;
        }
    }
    Fwhm f;
    f.hz = right - left;
    f.rbw = psd.rbw;
    f.resolution_limited = f.hz < 2.0 * psd.rbw;
    return f;
}

double plateau_level(const Psd& psd, double lo, double hi) {
    if (!(hi > lo && lo >= 0.0)) throw Error("plateau band must satisfy 0 <= lo < hi", "band");
    const auto peak = static_cast<std::size_t>(
        std::max_element(psd.density.begin(), psd.density.end()) - psd.density.begin());
    const double fp = psd.freq[peak];
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < psd.freq.size(); ++k) {
        const double d = std::abs(psd.freq[k] - fp);
        if (d >= lo && d <= hi) acc += psd.density[k], ++n;
    }
    if (n == 0) throw Error("plateau band holds no bins", "band");
    return acc / static_cast<double>(n);
}

std::vector<double> frequency_series_from_phase(std::span<const double> phase, double rate, double tau0) {
    if (!(rate > 0.0) || !(tau0 > 0.0)) throw Error("rate and tau0 must be positive", "tau0");
    const auto d = static_cast<std::size_t>(std::llround(tau0 * rate));
    if (d == 0) throw Error("tau0 is shorter than one sample", "tau0");
    if (phase.size() <= d) throw Error("phase record shorter than tau0", "phase");
    const double t = static_cast<double>(d) / rate;
    std::vector<double> out;
    out.reserve(phase.size() / d);
    for (std::size_t k = 0; k + d < phase.size(); k += d) out.push_back((phase[k + d] - phase[k]) / (kTwoPi * t));
    return out;
}

std::vector<double> allan_deviation(std::span<const double> freq, double tau0, std::span<const double> gates) {
    if (!(tau0 > 0.0)) throw Error("tau0 must be positive", "tau0");
    // Integrate relative to the first sample so a constant offset cancels exactly
    // in the second differences.
    const std::size_t m = freq.size() + 1;
    std::vector<double> x(m, 0.0);
    const double f0 = freq.empty() ? 0.0 : freq.front();
    for (std::size_t k = 0; k < freq.size(); ++k) x[k + 1] = x[k] + (freq[k] - f0) * tau0;
    std::vector<double> out;
    out.reserve(gates.size());
    for (double g : gates) {
        const double ratio = g / tau0;
        const auto n = static_cast<std::size_t>(std::llround(ratio));
        if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * ratio)
            throw Error("gate time must be a positive multiple of tau0", "gates");
        if (m < 2 * n + 1) throw Error("not enough data for gate " + std::to_string(g) + " s", "gates");
        double acc = 0.0;
        const std::size_t terms = m - 2 * n;
        for (std::size_t k = 0; k < terms; ++k) {
            const double d2 = x[k + 2 * n] - 2.0 * x[k + n] + x[k];
            acc += d2 * d2;
        }
        const double tau = static_cast<double>(n) * tau0;
        out.push_back(std::sqrt(acc / (2.0 * tau * tau * static_cast<double>(terms))));
    }
    return out;
}

std::size_t cpe_op_count(const DspConfig& cfg, std::size_t frame_length, std::size_t channels) {
    if (cfg.cpe_block == 0) throw Error("cpe_block must be >= 1", "cpe_block");
    if (cfg.skip_blocks < 0) throw Error("skip_blocks must be >= 0", "skip_blocks");
    const std::size_t blocks = (frame_length + cfg.cpe_block - 1) / cfg.cpe_block;
    const auto period = static_cast<std::size_t>(cfg.skip_blocks) + 1;
    const std::size_t per_channel = (blocks + period - 1) / period;
    const std::size_t estimating = cfg.master_channel ? std::min<std::size_t>(channels, 1) : channels;
    return per_channel * estimating;
}

}  // namespace combsim
