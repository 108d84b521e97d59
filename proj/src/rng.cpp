#include "combsim/rng.hpp"

namespace combsim {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::int64_t index) {
    const auto idx = splitmix64(static_cast<std::uint64_t>(index));
    return splitmix64(master ^ splitmix64(fnv1a64(name) ^ idx));
}

}  // namespace combsim
