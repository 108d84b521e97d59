#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace combsim {

/// Seed of one stochastic stream:
///   h = fnv1a64(name); s = splitmix64(master ^ splitmix64(h ^ splitmix64(index)))
/// Streams are keyed by name and line index, so adding a channel never
/// perturbs the streams of existing ones.
std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::int64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

/// One independent random stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master, std::string_view name, std::int64_t index = 0)
        : engine_(stream_seed(master, name, index)) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace combsim
