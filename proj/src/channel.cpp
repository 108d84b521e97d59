#include "combsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "combsim/fft.hpp"
#include "combsim/rng.hpp"

namespace combsim {

void LinkConfig::validate() const {
    if (!(length >= 0.0)) throw Error("length must be >= 0", "length");
    if (!(alpha >= 0.0)) throw Error("alpha must be >= 0", "alpha");
    if (!std::isfinite(beta2)) throw Error("beta2 must be finite", "beta2");
    if (!std::isfinite(beta3)) throw Error("beta3 must be finite", "beta3");
    if (!(gamma >= 0.0)) throw Error("gamma must be >= 0", "gamma");
    if (!(ase_psd >= 0.0)) throw Error("ase_psd must be >= 0", "ase_psd");
    if (!(ocnr_ref_bandwidth > 0.0)) throw Error("ocnr_ref_bandwidth must be positive", "ocnr_ref_bandwidth");
    if (!(grid_spacing > 0.0)) throw Error("grid_spacing must be positive", "grid_spacing");
    if (!(walkoff_decorrelation >= 0.0)) throw Error("walkoff_decorrelation must be >= 0", "walkoff_decorrelation");
    if (split_steps < 1) throw Error("split_steps must be >= 1", "split_steps");
    if (!std::isfinite(rx_snr_db)) throw Error("rx_snr_db must be finite", "rx_snr_db");
}

double LinkConfig::alpha_per_m() const { return alpha * std::log(10.0) / 10.0 / 1000.0; }

double walkoff_delay(int m, const LinkConfig& cfg) {
    return cfg.beta2 * cfg.length * kTwoPi * static_cast<double>(m) * cfg.grid_spacing;
}

namespace {

ComplexWaveform dispersion_filter(const ComplexWaveform& w, const LinkConfig& cfg, double line_abs_freq, double sign) {
    ComplexWaveform out = w;
    if (cfg.beta2 == 0.0 && cfg.beta3 == 0.0) return out;
    const double w_off = kTwoPi * (line_abs_freq + w.center_offset - cfg.reference_frequency);
    const std::size_t n = out.size();
    fft::forward(out.samples);
    for (std::size_t k = 0; k < n; ++k) {
        const double om = fft::bin_omega(k, n, w.sample_rate) + w_off;
        const double phase = (cfg.beta2 / 2.0 * om * om + cfg.beta3 / 6.0 * om * om * om) * cfg.length;
        out.samples[k] *= std::polar(1.0, -sign * phase);
    }
    fft::inverse(out.samples);
    return out;
}

}  // namespace

ComplexWaveform apply_dispersion(const ComplexWaveform& w, const LinkConfig& cfg, double line_abs_freq) {
    return dispersion_filter(w, cfg, line_abs_freq, 1.0);
}

ComplexWaveform compensate_dispersion(const ComplexWaveform& w, const LinkConfig& cfg, double line_abs_freq) {
    return dispersion_filter(w, cfg, line_abs_freq, -1.0);
}

// ---------------------------------------------------------------------------

FiberFluctSource::FiberFluctSource(int m, const LinkConfig& cfg, double rate, std::uint64_t seed)
    : common_(cfg.fluct.fiber_fluct_rms, cfg.fluct.fiber_fluct_corner, rate, stream_seed(seed, "ff_common")),
      line_(cfg.walkoff_decorrelation * std::abs(walkoff_delay(m, cfg)) * 1e9, cfg.fluct.fiber_fluct_corner, rate,
            stream_seed(seed, "ff_line", m)) {}

PhaseTrajectory synth_fiber_fluct(int m, const LinkConfig& cfg, std::size_t n, double rate, std::uint64_t seed) {
    if (n == 0) throw Error("n must be positive", "n");
    if (!(cfg.fluct.fiber_fluct_corner < rate / 2.0))
        throw Error("fiber_fluct_corner must be below rate / 2", "fluct.fiber_fluct_corner");
    FiberFluctSource src(m, cfg, rate, seed);
    std::vector<double> out(n);
    for (auto& v : out) v = src.next();
    return PhaseTrajectory(std::move(out), rate);
}

// ---------------------------------------------------------------------------

namespace {

// One-sided extent (Hz from the channel's own DC) holding 95 % of its power.
double occupied_extent(const ComplexWaveform& w) {
    std::vector<cplx> spec = w.samples;
    fft::forward(spec);
    const std::size_t n = spec.size();
    std::vector<std::pair<double, double>> bins(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        bins[k] = {std::abs(fft::bin_frequency(k, n, w.sample_rate)), std::norm(spec[k])};
        total += bins[k].second;
    }
    if (total == 0.0) return 0.0;
    std::sort(bins.begin(), bins.end());
    double acc = 0.0;
    for (const auto& [f, p] : bins) {
        acc += p;
        if (acc >= 0.95 * total) return f;
    }
    return bins.back().first;
}

}  // namespace

std::vector<ComplexWaveform> split_step_propagate(const std::vector<ComplexWaveform>& channels, const LinkConfig& cfg,
                                                  int steps) {
    if (channels.empty()) throw Error("split_step_propagate needs at least one channel", "channels");
    cfg.validate();
    const double rate = channels.front().sample_rate;
    const std::size_t n = channels.front().size();
    for (const auto& c : channels)
        if (c.sample_rate != rate || c.size() != n) throw Error("channels must share one sample grid", "channels");

    const double nyquist = rate / 2.0;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const double edge = std::abs(channels[c].center_offset) + occupied_extent(channels[c]);
        if (edge > 0.8 * nyquist)
            throw Error("channel " + std::to_string(c) + " edge exceeds 80% of Nyquist", "channels");
    }

    // Multiplex.
    std::vector<cplx> field(n, cplx{});
    for (const auto& c : channels) {
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / rate;
            field[k] += c.samples[k] * std::polar(1.0, kTwoPi * c.center_offset * t);
        }
    }

    const int nsteps = steps > 0 ? steps : cfg.split_steps;
    const double h = cfg.length / nsteps;
    const double alpha = cfg.alpha_per_m();
    std::vector<cplx> half_step(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double om = fft::bin_omega(k, n, rate);
        const double phase = (cfg.beta2 / 2.0 * om * om + cfg.beta3 / 6.0 * om * om * om) * (h / 2.0);
        half_step[k] = std::polar(std::exp(-alpha * h / 4.0), -phase);
    }

    for (int s = 0; s < nsteps; ++s) {
        fft::forward(field);
        for (std::size_t k = 0; k < n; ++k) field[k] *= half_step[k];
        fft::inverse(field);
        if (cfg.gamma != 0.0)
            for (auto& a : field) a *= std::polar(1.0, -cfg.gamma * std::norm(a) * h);
        fft::forward(field);
        for (std::size_t k = 0; k < n; ++k) field[k] *= half_step[k];
        fft::inverse(field);
    }

    // Demultiplex with an ideal filter of half the nearest-neighbor spacing.
    std::vector<cplx> spectrum = field;
    fft::forward(spectrum);
    std::vector<ComplexWaveform> out;
    out.reserve(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
        double half_width = std::numeric_limits<double>::infinity();
        for (std::size_t o = 0; o < channels.size(); ++o)
            if (o != c)
                half_width = std::min(half_width, std::abs(channels[o].center_offset - channels[c].center_offset) / 2.0);
        std::vector<cplx> band(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double f = fft::bin_frequency(k, n, rate);
            if (std::abs(f - channels[c].center_offset) <= half_width) band[k] = spectrum[k];
        }
        fft::inverse(band);
        ComplexWaveform w;
        w.sample_rate = rate;
        w.center_offset = channels[c].center_offset;
        w.samples.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / rate;
            w.samples[k] = band[k] * std::polar(1.0, -kTwoPi * channels[c].center_offset * t);
        }
        out.push_back(std::move(w));
    }
    return out;
}

// ---------------------------------------------------------------------------

ComplexWaveform add_noise(const ComplexWaveform& w, const NoiseTarget& target, std::uint64_t seed) {
    double psd = 0.0;
    if (target.kind == NoiseTarget::Kind::Osnr) {
        if (std::isinf(target.value) && target.value > 0.0) return w;
        if (!std::isfinite(target.value)) throw Error("OSNR target must be finite or +inf", "target");
        if (!(target.ref_bandwidth > 0.0)) throw Error("reference bandwidth must be positive", "target");
        const double linear = std::pow(10.0, target.value / 10.0);
        psd = w.mean_power() / (linear * target.ref_bandwidth);
    } else {
        if (!(target.value > 0.0) || !std::isfinite(target.value)) throw Error("noise PSD must be positive", "target");
        psd = target.value;
    }
    const double sigma = std::sqrt(psd * w.sample_rate / 2.0);
    ComplexWaveform out = w;
    Rng rng(seed);
    for (auto& s : out.samples) {
        const double re = rng.normal();
        const double im = rng.normal();
        s += sigma * cplx(re, im);
    }
    return out;
}

ComplexWaveform frequency_shift(const ComplexWaveform& w, double f) {
    ComplexWaveform out = w;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double cycles = f * static_cast<double>(k) / w.sample_rate;
        out.samples[k] *= std::polar(1.0, kTwoPi * (cycles - std::floor(cycles)));
    }
    out.center_offset = w.center_offset - f;
    return out;
}

}  // namespace combsim
