#include "combsim/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "combsim/fft.hpp"

namespace combsim {

void DspConfig::validate(int own_channel) const {
    if (cpe_block < 1) throw Error("cpe_block must be >= 1", "cpe_block");
    if (skip_blocks < 0) throw Error("skip_blocks must be >= 0", "skip_blocks");
    if (master_channel && *master_channel == own_channel)
        throw Error("master_channel must differ from the channel itself", "master_channel");
    if (master_channel && *master_channel == 0) throw Error("master_channel must be nonzero", "master_channel");
    if (equalizer != EqualizerKind::None) {
        if (taps < 1 || taps % 2 == 0) throw Error("taps must be odd and positive", "taps");
        if (volterra_memory < 1 || volterra_memory % 2 == 0)
            throw Error("volterra_memory must be odd and positive", "volterra_memory");
        if (!(step_size > 0.0 && step_size < 2.0)) throw Error("step_size must lie in (0, 2)", "step_size");
        if (training_symbols == 0) throw Error("training_symbols must be positive", "training_symbols");
    }
}

double foe_precalc(int m, double f_ref, int locked_index) {
    if (locked_index == 0) throw Error("locked_index must be nonzero", "locked_index");
    return static_cast<double>(m) * f_ref / static_cast<double>(locked_index);
}

double foe_fourth_power(const ComplexWaveform& w) {
    const std::size_t n = w.size();
    if (n < (1u << 14)) throw Error("foe_fourth_power needs at least 2^14 samples", "samples");
    std::vector<cplx> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx s2 = w.samples[k] * w.samples[k];
        x[k] = s2 * s2;
    }
    fft::forward(x);
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = std::abs(x[k]);
        if (a > best) best = a, peak = k;
    }
    const double a0 = std::abs(x[(peak + n - 1) % n]);
    const double a1 = best;
    const double a2 = std::abs(x[(peak + 1) % n]);
    const double denom = a0 - 2.0 * a1 + a2;
    const double delta = denom != 0.0 ? 0.5 * (a0 - a2) / denom : 0.0;
    const double f = fft::bin_frequency(peak, n, w.sample_rate) + delta * w.sample_rate / static_cast<double>(n);
    return f / 4.0;
}

double wrap_phase(double x) {
    double y = std::remainder(x, kTwoPi);
    if (y <= -kPi) y += kTwoPi;
    return y;
}

std::vector<double> unwrap(std::span<const double> wrapped) {
    std::vector<double> out(wrapped.begin(), wrapped.end());
    for (std::size_t k = 1; k < out.size(); ++k) out[k] = out[k - 1] + wrap_phase(wrapped[k] - wrapped[k - 1]);
    return out;
}

double residual_foe_from_slope(const CpeTrace& trace) {
    const std::size_t n = trace.phase_estimates.size();
    if (n < 10) throw Error("residual FOE needs at least 10 phase estimates", "phase_estimates");
    if (trace.block_indices.size() != n) throw Error("trace block indices do not match its estimates", "block_indices");
    const auto ph = unwrap(trace.phase_estimates);
    const double bs = static_cast<double>(trace.block_size);
    double mt = 0.0, mp = 0.0;
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) {
        t[k] = (static_cast<double>(trace.block_indices[k]) + 0.5) * bs / trace.symbol_rate;
        mt += t[k];
        mp += ph[k];
    }
    mt /= static_cast<double>(n);
    mp /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxy += (t[k] - mt) * (ph[k] - mp);
        sxx += (t[k] - mt) * (t[k] - mt);
    }
    return sxy / sxx / kTwoPi;
}

CpeResult cpe_pilot_block(std::span<const cplx> rx, std::span<const cplx> pilots, const DspConfig& cfg,
                          double symbol_rate) {
    if (cfg.cpe_block < 1) throw Error("cpe_block must be >= 1", "cpe_block");
    if (cfg.skip_blocks < 0) throw Error("skip_blocks must be >= 0", "skip_blocks");
    if (rx.empty()) throw Error("no symbols to correct", "rx");
    const std::size_t bs = cfg.cpe_block;
    const std::size_t blocks = (rx.size() + bs - 1) / bs;
    const auto period = static_cast<std::size_t>(cfg.skip_blocks) + 1;

    CpeResult res;
    auto& tr = res.trace;
    tr.block_size = bs;
    tr.skip_blocks = cfg.skip_blocks;
    tr.symbol_rate = symbol_rate;
    tr.applied_phase.resize(rx.size());
    for (std::size_t b = 0; b < blocks; b += period) {
        const std::size_t lo = b * bs;
        const std::size_t hi = std::min(lo + bs, rx.size());
        if (pilots.size() < hi) throw Error("missing pilots for block " + std::to_string(b), "pilots");
        cplx acc{};
        for (std::size_t s = lo; s < hi; ++s) acc += rx[s] * std::conj(pilots[s]);
        const double est = std::arg(acc);
        tr.block_indices.push_back(b);
        tr.phase_estimates.push_back(est);
        const std::size_t end = std::min((b + period) * bs, rx.size());
        for (std::size_t s = lo; s < end; ++s) tr.applied_phase[s] = est;
    }
    res.corrected = apply_cpe(rx, tr);
    return res;
}

CpeTrace cpe_master_slave(const CpeTrace& master, int m_master, int m_slave, double static_offset) {
    if (m_master == 0) throw Error("master channel index must be nonzero", "m_master");
    const double ratio = static_cast<double>(m_slave) / static_cast<double>(m_master);
    CpeTrace out = master;
    if (m_slave == m_master && static_offset == 0.0) return out;
    const auto u = unwrap(master.phase_estimates);
    const std::size_t group = master.block_size * (static_cast<std::size_t>(master.skip_blocks) + 1);
    for (std::size_t j = 0; j < u.size(); ++j) out.phase_estimates[j] = wrap_phase(ratio * u[j] + static_offset);
    for (std::size_t s = 0; s < out.applied_phase.size(); ++s) {
        const std::size_t j = std::min(s / group, u.size() - 1);
        out.applied_phase[s] = wrap_phase(ratio * u[j] + static_offset);
    }
    return out;
}

double calibrate_slave_offset(std::span<const cplx> rx, std::span<const cplx> pilots, const CpeTrace& scaled,
                              std::size_t blocks) {
    if (blocks == 0) throw Error("calibration needs at least one block", "blocks");
    const std::size_t n = std::min({scaled.block_size * blocks, rx.size(), scaled.applied_phase.size()});
    if (pilots.size() < n || n == 0) throw Error("missing pilots for the calibration block", "pilots");
    cplx acc{};
    for (std::size_t s = 0; s < n; ++s) acc += rx[s] * std::conj(pilots[s]) * std::polar(1.0, -scaled.applied_phase[s]);
    return std::arg(acc);
}

std::vector<cplx> apply_cpe(std::span<const cplx> rx, const CpeTrace& trace) {
    if (trace.applied_phase.size() != rx.size()) throw Error("CPE trace length differs from the symbol count", "trace");
    std::vector<cplx> out(rx.size());
    for (std::size_t s = 0; s < rx.size(); ++s) out[s] = rx[s] * std::polar(1.0, -trace.applied_phase[s]);
    return out;
}

std::size_t count_cycle_slips(const CpeTrace& trace) {
    std::size_t slips = 0;
    for (std::size_t k = 1; k < trace.phase_estimates.size(); ++k)
        if (std::abs(wrap_phase(trace.phase_estimates[k] - trace.phase_estimates[k - 1])) > kPi / 2.0) ++slips;
    return slips;
}

ComplexWaveform gram_schmidt_iq(const ComplexWaveform& w) {
    const double n = static_cast<double>(w.size());
    double pi = 0.0, iq = 0.0, p_in = 0.0;
    for (const auto& v : w.samples) {
        pi += v.real() * v.real();
        iq += v.real() * v.imag();
        p_in += std::norm(v);
    }
    if (w.samples.empty() || pi == 0.0) throw Error("Gram-Schmidt needs a nonzero I rail", "samples");
    const double proj = iq / pi;
    double pq = 0.0;
    for (const auto& v : w.samples) {
        const double q = v.imag() - proj * v.real();
        pq += q * q;
    }
    if (pq == 0.0) throw Error("Gram-Schmidt needs a Q rail independent of I", "samples");
    const double rail = std::sqrt(0.5 * p_in / n);
    const double si = rail / std::sqrt(pi / n);
    const double sq = rail / std::sqrt(pq / n);
    ComplexWaveform out = w;
    for (auto& v : out.samples) v = cplx(si * v.real(), sq * (v.imag() - proj * v.real()));
    return out;
}

ComplexWaveform cd_compensate(const ComplexWaveform& w, const LinkConfig& cfg, double line_abs_freq) {
    return compensate_dispersion(w, cfg, line_abs_freq);
}

// ---------------------------------------------------------------------------

namespace {

struct Regressor {
    int taps;
    int memory;
    std::vector<cplx> u;

    Regressor(int t, int m, bool volterra) : taps(t), memory(volterra ? m : 0) {
        u.resize(static_cast<std::size_t>(taps + memory * memory));
    }

    void fill(std::span<const cplx> x, std::size_t n) {
        const auto at = [&](long k) -> cplx {
            return (k >= 0 && k < static_cast<long>(x.size())) ? x[static_cast<std::size_t>(k)] : cplx{};
        };
        const long c = static_cast<long>(n);
        for (int k = 0; k < taps; ++k) u[static_cast<std::size_t>(k)] = at(c + taps / 2 - k);
        for (int i = 0; i < memory; ++i)
            for (int j = 0; j < memory; ++j)
                u[static_cast<std::size_t>(taps + i * memory + j)] =
                    at(c + memory / 2 - i) * std::norm(at(c + memory / 2 - j));
    }
};

}  // namespace

std::vector<cplx> EqualizerModel::apply(std::span<const cplx> x) const {
    if (kind == EqualizerKind::None) return {x.begin(), x.end()};
    Regressor r(taps, memory, kind == EqualizerKind::Volterra2);
    std::vector<cplx> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        r.fill(x, n);
        cplx y{};
        for (int k = 0; k < taps; ++k) y += linear[static_cast<std::size_t>(k)] * r.u[static_cast<std::size_t>(k)];
        for (std::size_t k = 0; k < kernel.size(); ++k) y += kernel[k] * r.u[static_cast<std::size_t>(taps) + k];
        out[n] = y;
    }
    return out;
}

EqualizerModel train_equalizer(std::span<const cplx> rx, std::span<const cplx> pilots, const DspConfig& cfg) {
    EqualizerModel model;
    model.kind = cfg.equalizer;
    if (cfg.equalizer == EqualizerKind::None) return model;
    if (cfg.taps < 1 || cfg.taps % 2 == 0) throw Error("taps must be odd and positive", "taps");
    if (cfg.equalizer == EqualizerKind::Volterra2 && (cfg.volterra_memory < 1 || cfg.volterra_memory % 2 == 0))
        throw Error("volterra_memory must be odd and positive", "volterra_memory");
    const std::size_t ntrain = std::min({cfg.training_symbols, pilots.size(), rx.size()});
    if (ntrain == 0) throw Error("equalizer training needs pilots", "pilots");

    const bool volterra = cfg.equalizer == EqualizerKind::Volterra2;
    model.taps = cfg.taps;
    model.memory = volterra ? cfg.volterra_memory : 0;
    model.linear.assign(static_cast<std::size_t>(cfg.taps), cplx{});
    model.linear[static_cast<std::size_t>(cfg.taps / 2)] = 1.0;
    model.kernel.assign(static_cast<std::size_t>(model.memory * model.memory), cplx{});

    Regressor r(cfg.taps, cfg.volterra_memory, volterra);
    constexpr std::size_t window = 1000;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < ntrain; ++n) {
        r.fill(rx, n);
        cplx y{};
        double energy = 1e-12;
        for (std::size_t k = 0; k < r.u.size(); ++k) {
            const cplx w = k < model.linear.size() ? model.linear[k] : model.kernel[k - model.linear.size()];
            y += w * r.u[k];
            energy += std::norm(r.u[k]);
        }
        const cplx e = pilots[n] - y;
        const cplx g = cfg.step_size * e / energy;
        for (std::size_t k = 0; k < r.u.size(); ++k) {
            cplx& w = k < model.linear.size() ? model.linear[k] : model.kernel[k - model.linear.size()];
            w += g * std::conj(r.u[k]);
        }
        acc += std::norm(e);
        if (++count == window || n + 1 == ntrain) {
            const double mse = acc / static_cast<double>(count);
            model.training_mse.push_back(mse);
            const double first = std::max(model.training_mse.front(), 1e-12);
            if (!std::isfinite(mse) || mse > 10.0 * first)
                throw Error("equalizer diverged: window " + std::to_string(model.training_mse.size() - 1) +
                                " error " + std::to_string(mse) + " vs initial " + std::to_string(first),
                            "step_size");
            acc = 0.0;
            count = 0;
        }
    }
    return model;
}

std::vector<cplx> equalize(std::span<const cplx> rx, std::span<const cplx> pilots, const DspConfig& cfg) {
    return train_equalizer(rx, pilots, cfg).apply(rx);
}

}  // namespace combsim
