#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "combsim/channel.hpp"
#include "combsim/fft.hpp"
#include "combsim/rng.hpp"
#include "combsim/txrx.hpp"

using namespace combsim;
using Catch::Approx;

namespace {

const double kS = 1.0 / std::sqrt(10.0);

cplx mod_one(std::uint8_t b3, std::uint8_t b2, std::uint8_t b1, std::uint8_t b0) {
    const std::vector<std::uint8_t> b{b3, b2, b1, b0};
    return qam16_mod(b).symbols.front();
}

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Exact Gray 16QAM bit error rate at Es/N0 = snr (linear), unit symbol energy.
double gray16_ber(double snr) {
    const double sigma = std::sqrt(0.5 / snr);
    const double a = kS / sigma;
    return (3.0 * q_func(a) + 2.0 * q_func(3.0 * a) - q_func(5.0 * a)) / 4.0;
}

ModulationConfig small_cfg() {
    ModulationConfig c;
    c.baud = 1e9;
    c.frame_length = 64;
    c.pilot_block = 32;
    return c;
}

}  // namespace

TEST_CASE("Gray table") {
    CHECK(mod_one(0, 0, 0, 0) == cplx(kS, kS));
    CHECK(mod_one(1, 1, 1, 1) == cplx(-3 * kS, -3 * kS));
    CHECK(mod_one(0, 1, 1, 0) == cplx(3 * kS, -kS));
    CHECK(mod_one(1, 0, 0, 1) == cplx(-kS, 3 * kS));
}

TEST_CASE("Every nibble maps and demaps to itself") {
    std::vector<std::uint8_t> bits;
    for (int v = 0; v < 16; ++v)
        for (int k = 3; k >= 0; --k) bits.push_back(static_cast<std::uint8_t>((v >> k) & 1));
    const auto f = qam16_mod(bits, 7);
    CHECK(f.channel_index == 7);
    CHECK(f.bits == bits);
    CHECK(qam16_demap(f.symbols) == bits);
    CHECK(qam16_decide(f.symbols) == f.symbols);
}

TEST_CASE("Nearest constellation neighbors differ by one bit") {
    std::vector<std::uint8_t> bits;
    for (int v = 0; v < 16; ++v)
        for (int k = 3; k >= 0; --k) bits.push_back(static_cast<std::uint8_t>((v >> k) & 1));
    const auto f = qam16_mod(bits);
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) {
            if (std::abs(std::abs(f.symbols[a] - f.symbols[b]) - 2 * kS) > 1e-12) continue;
            int d = 0;
            for (int k = 0; k < 4; ++k) d += bits[4 * a + k] != bits[4 * b + k];
            CHECK(d == 1);
        }
}

TEST_CASE("Random frames have unit mean power") {
    const auto f = qam16_mod(random_bits(4 * 200000, 3));
    double p = 0.0;
    for (const auto& s : f.symbols) p += std::norm(s);
    CHECK(p / f.symbols.size() == Approx(1.0).epsilon(0.01));
}

TEST_CASE("Samples on a threshold go to the lower level") {
    const std::vector<cplx> ties{cplx(0.0, 2 * kS), cplx(-2 * kS, 0.0)};
    const auto d = qam16_decide(ties);
    CHECK(d[0].real() == Approx(-kS));
    CHECK(d[0].imag() == Approx(kS));
    CHECK(d[1].real() == Approx(-3 * kS));
    CHECK(d[1].imag() == Approx(-kS));
}

TEST_CASE("Modulation errors") {
    CHECK_THROWS_AS(qam16_mod(std::vector<std::uint8_t>{}), Error);
    CHECK_THROWS_AS(qam16_mod(std::vector<std::uint8_t>{0, 1, 0}), Error);
    CHECK_THROWS_AS(qam16_demap(std::vector<cplx>{}), Error);
    ModulationConfig c;
    c.frame_length = 100;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ModulationConfig{};
    c.samples_per_symbol = 1;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("AWGN bit error rate matches the exact Gray 16QAM curve") {
    const double snr_db = 16.5, snr = std::pow(10.0, snr_db / 10.0);
    const auto f = qam16_mod(random_bits(4 * 1000000, 11));
    Rng rng(12);
    const double sigma = std::sqrt(0.5 / snr);
    std::vector<cplx> rx(f.symbols.size());
    for (std::size_t k = 0; k < rx.size(); ++k) rx[k] = f.symbols[k] + sigma * cplx(rng.normal(), rng.normal());
    const auto bits = qam16_demap(rx);
    std::size_t errors = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) errors += bits[k] != f.bits[k];
    const double ber = static_cast<double>(errors) / static_cast<double>(bits.size());
    CHECK(ber == Approx(gray16_ber(snr)).epsilon(0.05));
}

TEST_CASE("Rectangle modulation and integrate-and-dump recover the symbols") {
    const auto cfg = small_cfg();
    const auto f = qam16_mod(random_bits(4 * cfg.frame_length, 1));
    const std::size_t n = cfg.frame_length * cfg.samples_per_symbol;
    const PhaseTrajectory zero(std::vector<double>(n, 0.0), cfg.sample_rate());
    const auto w = modulate_line(f, cfg, zero);
    CHECK(w.size() == n);
    CHECK(w.samples[1] == f.symbols[0]);
    CHECK(w.samples[4] == f.symbols[1]);
    const auto y = matched_filter(w, cfg.samples_per_symbol);
    for (std::size_t k = 0; k < y.size(); ++k) CHECK(std::abs(y[k] - f.symbols[k]) < 1e-15);
    CHECK_THROWS_AS(modulate_line(f, cfg, PhaseTrajectory(std::vector<double>(n - 1, 0.0), cfg.sample_rate())), Error);
}

TEST_CASE("Mixing with the carrier's own phase removes it") {
    const auto cfg = small_cfg();
    const auto f = qam16_mod(random_bits(4 * cfg.frame_length, 2));
    const std::size_t n = cfg.frame_length * cfg.samples_per_symbol;
    Rng rng(3);
    std::vector<double> ph(n);
    for (auto& v : ph) v = rng.normal() * 3.0;
    const PhaseTrajectory carrier(ph, cfg.sample_rate());
    const auto w = modulate_line(f, cfg, carrier);
    const auto base = coherent_mix(w, carrier, 0.0);
    const auto y = matched_filter(base, cfg.samples_per_symbol);
    for (std::size_t k = 0; k < y.size(); ++k) CHECK(std::abs(y[k] - f.symbols[k]) < 1e-12);
}

TEST_CASE("LO offset leaves a tone at minus the offset") {
    ComplexWaveform w;
    w.sample_rate = 1e6;
    w.samples.assign(1000, cplx(1.0, 0.0));
    const PhaseTrajectory zero(std::vector<double>(1000, 0.0), 1e6);
    const auto m = coherent_mix(w, zero, 1e3);
    for (std::size_t k = 0; k < 1000; ++k)
        CHECK(std::arg(m.samples[k] * std::polar(1.0, kTwoPi * 1e3 * k / 1e6)) == Approx(0.0).margin(1e-9));
}

TEST_CASE("IQ phase skew produces the predicted image") {
    const std::size_t n = 1024;
    const double rate = 1e6;
    const std::size_t bin = 64;
    ComplexWaveform w;
    w.sample_rate = rate;
    for (std::size_t k = 0; k < n; ++k) w.samples.push_back(std::polar(1.0, kTwoPi * bin * k / n));
    const double skew = 0.1;
    auto spec = add_iq_imbalance(w, 0.0, skew).samples;
    fft::forward(spec);
    const double image_db = 20.0 * std::log10(std::abs(spec[n - bin]) / std::abs(spec[bin]));
    CHECK(image_db == Approx(20.0 * std::log10(std::tan(0.05))).margin(1e-6));
    CHECK(add_iq_imbalance(w, 0.0, 0.0).samples == w.samples);
    CHECK_THROWS_AS(add_iq_imbalance(w, NAN, 0.0), Error);
}

TEST_CASE("Modulation is linear in the symbols") {
    const auto cfg = small_cfg();
    const std::size_t n = cfg.frame_length * cfg.samples_per_symbol;
    const PhaseTrajectory ph(std::vector<double>(n, 0.4), cfg.sample_rate());
    const auto a = qam16_mod(random_bits(4 * cfg.frame_length, 5));
    const auto b = qam16_mod(random_bits(4 * cfg.frame_length, 6));
    SymbolFrame sum = a;
    for (std::size_t k = 0; k < sum.symbols.size(); ++k) sum.symbols[k] += b.symbols[k];
    const auto wa = modulate_line(a, cfg, ph), wb = modulate_line(b, cfg, ph), ws = modulate_line(sum, cfg, ph);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(ws.samples[k] - wa.samples[k] - wb.samples[k]) < 1e-15);
}

TEST_CASE("Fixture CSV round trip") {
    const auto f = qam16_mod(random_bits(4 * 50, 8), 3);
    std::stringstream ss;
    write_frame_csv(ss, f);
    const auto g = read_frame_csv(ss, 3);
    CHECK(g.bits == f.bits);
    CHECK(g.symbols == f.symbols);
    std::stringstream bad("index,bits,re,im\n0,01x1,0.1,0.2\n");
    CHECK_THROWS_AS(read_frame_csv(bad), Error);
    std::stringstream header("idx,b\n");
    CHECK_THROWS_AS(read_frame_csv(header), Error);
}
