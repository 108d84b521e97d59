#include "combsim/waveform.hpp"

#include <algorithm>
#include <cmath>

namespace combsim {

PhaseTrajectory::PhaseTrajectory(std::vector<double> s, double rate, double start)
    : samples(std::move(s)), sample_rate(rate), t0(start) {}

void PhaseTrajectory::validate() const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
        throw Error("phase trajectory sample_rate must be positive", "sample_rate");
    for (double v : samples)
        if (!std::isfinite(v)) throw Error("phase trajectory contains a non-finite sample", "samples");
}

double PhaseTrajectory::at(double t) const {
    if (samples.empty()) return 0.0;
    const double x = (t - t0) * sample_rate;
    if (x <= 0.0) return samples.front();
    const auto last = static_cast<double>(samples.size() - 1);
    if (x >= last) return samples.back();
    const auto k = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(k);
    return samples[k] + frac * (samples[k + 1] - samples[k]);
}

void require_aligned(const PhaseTrajectory& a, const PhaseTrajectory& b, const char* what) {
    if (a.size() != b.size() || a.sample_rate != b.sample_rate || a.t0 != b.t0)
        throw Error(std::string("misaligned phase trajectories in ") + what);
}

PhaseTrajectory operator+(const PhaseTrajectory& a, const PhaseTrajectory& b) {
    require_aligned(a, b, "operator+");
    PhaseTrajectory out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out.samples[k] += b.samples[k];
    return out;
}

PhaseTrajectory operator-(const PhaseTrajectory& a, const PhaseTrajectory& b) {
    require_aligned(a, b, "operator-");
    PhaseTrajectory out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out.samples[k] -= b.samples[k];
    return out;
}

PhaseTrajectory operator*(double k, const PhaseTrajectory& a) {
    PhaseTrajectory out = a;
    for (double& v : out.samples) v *= k;
    return out;
}

PhaseTrajectory resample_linear(const PhaseTrajectory& p, double rate, std::size_t n, double t0) {
    if (!(rate > 0.0)) throw Error("resample rate must be positive", "rate");
    if (p.samples.empty()) throw Error("cannot resample an empty trajectory");
    std::vector<double> out(n);
    const double step = p.sample_rate / rate;
    const double x0 = (t0 - p.t0) * p.sample_rate;
    const auto last = p.samples.size() - 1;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = x0 + static_cast<double>(k) * step;
        if (x <= 0.0) {
            out[k] = p.samples.front();
        } else if (x >= static_cast<double>(last)) {
            out[k] = p.samples.back();
        } else {
            const auto i = static_cast<std::size_t>(x);
            const double frac = x - static_cast<double>(i);
            out[k] = p.samples[i] + frac * (p.samples[i + 1] - p.samples[i]);
        }
    }
    return PhaseTrajectory(std::move(out), rate, t0);
}

double ComplexWaveform::mean_power() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : samples) acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

double ComplexWaveform::power_dbm() const { return watts_to_dbm(mean_power()); }

void ComplexWaveform::validate() const {
    if (!(sample_rate > 0.0)) throw Error("waveform sample_rate must be positive", "sample_rate");
    for (const auto& s : samples)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw Error("waveform contains a non-finite sample", "samples");
}

double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace combsim
