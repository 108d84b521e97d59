#include "combsim/comb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace combsim {

bool CombSpec::has_line(int m) const {
    return std::find(line_indices.begin(), line_indices.end(), m) != line_indices.end();
}

void CombSpec::require_line(int m) const {
    if (!has_line(m)) throw Error("line index " + std::to_string(m) + " is not part of the comb", "line_indices");
}

void CombSpec::validate() const {
    if (!(mode_spacing > 0.0)) throw Error("mode_spacing must be positive", "mode_spacing");
    if (!(pump_frequency > 0.0)) throw Error("pump_frequency must be positive", "pump_frequency");
    if (!has_line(0)) throw Error("comb must contain line 0 (the pump)", "line_indices");
}

void PhaseNoiseParams::validate(double rate) const {
    const std::pair<const char*, double> fields[] = {
        {"pump_linewidth", pump_linewidth},     {"rep_rate_jitter_rms", rep_rate_jitter_rms},
        {"rep_rate_corner", rep_rate_corner},   {"fiber_fluct_rms", fiber_fluct_rms},
        {"fiber_fluct_corner", fiber_fluct_corner},
    };
    for (const auto& [name, v] : fields)
        if (!std::isfinite(v) || v < 0.0) throw Error(std::string(name) + " must be finite and >= 0", name);
    if (rep_rate_corner >= rate / 2.0) throw Error("rep_rate_corner must be below rate / 2", "rep_rate_corner");
    if (fiber_fluct_corner >= rate / 2.0)
        throw Error("fiber_fluct_corner must be below rate / 2", "fiber_fluct_corner");
}

// ---------------------------------------------------------------------------

WienerPhaseSource::WienerPhaseSource(double linewidth, double rate, std::uint64_t seed)
    : step_sigma_(std::sqrt(kTwoPi * linewidth / rate)), rng_(seed) {}

double WienerPhaseSource::next() {
    const double out = phase_;
    phase_ += step_sigma_ * rng_.normal();
    return out;
}

RepRateJitterSource::RepRateJitterSource(double rms, double corner, double rate, std::uint64_t seed)
    : decay_(std::exp(-kTwoPi * corner / rate)),
      drive_(rms * std::sqrt(1.0 - decay_ * decay_)),
      rate_(rate),
      rng_(seed) {
    freq_ = rms * rng_.normal();
}

double RepRateJitterSource::next() {
    const double out = phase_;
    phase_ += kTwoPi * freq_ / rate_;
    freq_ = decay_ * freq_ + drive_ * rng_.normal();
    return out;
}

LowPassNoiseSource::LowPassNoiseSource(double rms, double corner, double rate, std::uint64_t seed)
    : rng_(seed) {
    constexpr int order = 8;
    const double k = std::tan(kPi * corner / rate);
    for (int s = 0; s < order / 2; ++s) {
        const double q = 1.0 / (2.0 * std::sin((2.0 * s + 1.0) * kPi / (2.0 * order)));
        const double norm = 1.0 / (1.0 + k / q + k * k);
        auto& b = sections_[static_cast<std::size_t>(s)];
        b.b0 = k * k * norm;
        b.b1 = 2.0 * b.b0;
        b.b2 = b.b0;
        b.a1 = 2.0 * (k * k - 1.0) * norm;
        b.a2 = (1.0 - k / q + k * k) * norm;
    }
    if (rms == 0.0 || corner == 0.0) return;

    // Unit-variance white input gives output variance sum(h^2).
    auto probe = sections_;
    double energy = 0.0;
    const auto settle = static_cast<std::size_t>(200.0 * rate / corner) + 1000;
    for (std::size_t n = 0; n < settle; ++n) {
        double y = (n == 0) ? 1.0 : 0.0;
        for (auto& b : probe) y = b.step(y);
        energy += y * y;
    }
    input_sigma_ = rms / std::sqrt(energy);

    const auto warmup = static_cast<std::size_t>(20.0 * rate / corner) + 100;
    for (std::size_t n = 0; n < warmup; ++n) next();
}

double LowPassNoiseSource::next() {
    if (input_sigma_ == 0.0) return 0.0;
    double y = input_sigma_ * rng_.normal();
    for (auto& b : sections_) y = b.step(y);
    return y;
}

// ---------------------------------------------------------------------------

PhaseTrajectory zero_trajectory(std::size_t n, double rate, double t0) {
    return PhaseTrajectory(std::vector<double>(n, 0.0), rate, t0);
}

PhaseTrajectory synth_wiener_phase(double linewidth, std::size_t n, double rate, std::uint64_t seed) {
    if (n == 0) throw Error("n must be positive", "n");
    if (!std::isfinite(linewidth) || linewidth < 0.0) throw Error("linewidth must be finite and >= 0", "linewidth");
    if (!(rate > 0.0)) throw Error("rate must be positive", "rate");
    WienerPhaseSource src(linewidth, rate, seed);
    std::vector<double> out(n);
    for (auto& v : out) v = src.next();
    return PhaseTrajectory(std::move(out), rate);
}

PhaseTrajectory synth_rep_rate_phase(int m, const PhaseNoiseParams& params, std::size_t n, double rate,
                                     std::uint64_t seed) {
    if (n == 0) throw Error("n must be positive", "n");
    if (!(rate > 0.0)) throw Error("rate must be positive", "rate");
    if (params.rep_rate_corner >= rate / 2.0) throw Error("rep_rate_corner must be below rate / 2", "rep_rate_corner");
    if (m == 0) return zero_trajectory(n, rate);
    RepRateJitterSource src(params.rep_rate_jitter_rms, params.rep_rate_corner, rate, seed);
    std::vector<double> out(n);
    for (auto& v : out) v = static_cast<double>(m) * src.next();
    return PhaseTrajectory(std::move(out), rate);
}

PhaseTrajectory synth_lowpass_phase(double rms, double corner, std::size_t n, double rate, std::uint64_t seed) {
    if (n == 0) throw Error("n must be positive", "n");
    if (corner >= rate / 2.0) throw Error("corner must be below rate / 2", "corner");
    LowPassNoiseSource src(rms, corner, rate, seed);
    std::vector<double> out(n);
    for (auto& v : out) v = src.next();
    return PhaseTrajectory(std::move(out), rate);
}

PhaseTrajectory compose_line_phase(const LinePhaseDecomposition& d) {
    require_aligned(d.phi_int, d.phi_ff, "compose_line_phase");
    require_aligned(d.phi_int, d.phi_nl, "compose_line_phase");
    require_aligned(d.phi_int, d.phi_rep, "compose_line_phase");
    PhaseTrajectory out = d.phi_int;
    for (std::size_t k = 0; k < out.size(); ++k)
        out.samples[k] = d.phi_int.samples[k] + d.phi_ff.samples[k] + d.phi_nl.samples[k] + d.phi_rep.samples[k];
    return out;
}

PhaseTrajectory clone_pump_phase(const PhaseTrajectory& tx_pump, const PhaseTrajectory& link_ff,
                                 const PhaseTrajectory& link_nl) {
    require_aligned(tx_pump, link_ff, "clone_pump_phase");
    require_aligned(tx_pump, link_nl, "clone_pump_phase");
    PhaseTrajectory out = tx_pump;
    for (std::size_t k = 0; k < out.size(); ++k) out.samples[k] += link_ff.samples[k] + link_nl.samples[k];
    return out;
}

}  // namespace combsim
