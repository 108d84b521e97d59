#pragma once

#include <span>
#include <vector>

#include "combsim/waveform.hpp"

namespace combsim::fft {

// Thin FFTW wrapper. Plans are cached per (size, direction) and created with
// FFTW_ESTIMATE so results do not depend on planner timing. Execution is
// thread-safe; planning is serialized internally.

/// In-place forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N). Unnormalized.
void forward(std::span<cplx> data);

/// In-place inverse DFT including the 1/N factor.
void inverse(std::span<cplx> data);

/// Angular frequency (rad/s) of FFT bin k for an N-point transform at `rate`,
/// mapped to [-rate/2, rate/2).
double bin_omega(std::size_t k, std::size_t n, double rate);

/// Frequency (Hz) of bin k, mapped to [-rate/2, rate/2).
double bin_frequency(std::size_t k, std::size_t n, double rate);

}  // namespace combsim::fft
