#include "combsim/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace combsim::fft {
namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        // In-place plan: execute() always runs with input == output.
        auto* buf = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void execute(std::span<cplx> data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = cache().get(data.size(), sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

}  // namespace

void forward(std::span<cplx> data) { execute(data, FFTW_FORWARD); }

void inverse(std::span<cplx> data) {
    execute(data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

double bin_frequency(std::size_t k, std::size_t n, double rate) {
    const auto kk = static_cast<long long>(k);
    const auto nn = static_cast<long long>(n);
    const long long signed_k = (kk < (nn + 1) / 2) ? kk : kk - nn;
    return static_cast<double>(signed_k) * rate / static_cast<double>(n);
}

double bin_omega(std::size_t k, std::size_t n, double rate) { return kTwoPi * bin_frequency(k, n, rate); }

}  // namespace combsim::fft
