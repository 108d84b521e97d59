#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace combsim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised for bad arguments and violated preconditions. `field` names the
/// offending parameter (a config path when raised by the scenario loader).
class Error : public std::invalid_argument {
public:
    explicit Error(const std::string& what, std::string field = {})
        : std::invalid_argument(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Uniformly sampled phase in radians. Sample k sits at t0 + k / sample_rate.
struct PhaseTrajectory {
    std::vector<double> samples;
    double sample_rate = 1.0;
    double t0 = 0.0;

    PhaseTrajectory() = default;
    PhaseTrajectory(std::vector<double> s, double rate, double start = 0.0);

    std::size_t size() const noexcept { return samples.size(); }
    double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) / sample_rate; }
    double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }

    /// Throws unless rate > 0 and every sample is finite.
    void validate() const;

    /// Linear interpolation at time t; clamps outside the sampled span.
    double at(double t) const;
};

/// Throws Error when the two trajectories differ in rate, start or length.
void require_aligned(const PhaseTrajectory& a, const PhaseTrajectory& b, const char* what);

PhaseTrajectory operator+(const PhaseTrajectory& a, const PhaseTrajectory& b);
PhaseTrajectory operator-(const PhaseTrajectory& a, const PhaseTrajectory& b);
PhaseTrajectory operator*(double k, const PhaseTrajectory& a);

/// Resamples by linear interpolation onto n points at `rate`, starting at t0.
PhaseTrajectory resample_linear(const PhaseTrajectory& p, double rate, std::size_t n, double t0);

/// Complex baseband of one channel. Samples are in sqrt(W); center_offset is
/// the frequency (Hz) of baseband DC relative to the channel's reference line.
struct ComplexWaveform {
    std::vector<cplx> samples;
    double sample_rate = 1.0;
    double center_offset = 0.0;

    std::size_t size() const noexcept { return samples.size(); }
    double mean_power() const;
    double power_dbm() const;
    void validate() const;
};

double watts_to_dbm(double w);
double dbm_to_watts(double dbm);

}  // namespace combsim
