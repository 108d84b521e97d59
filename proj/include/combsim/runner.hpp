#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "combsim/comb.hpp"
#include "combsim/locking.hpp"
#include "combsim/metrics.hpp"
#include "combsim/scenario.hpp"
#include "combsim/txrx.hpp"

namespace combsim {

/// Runs f(0..n-1) on up to `threads` workers. Each index must write only its
/// own output slot. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

/// Control-rate simulation of the transmitter comb, the link fluctuations and
/// the receiver comb (or of two free lasers per line in IndependentLasers
/// mode). Line phases are available after each step().
class CombPairSimulator {
public:
    CombPairSimulator(const Scenario& s, CoherenceMode mode, std::uint64_t seed, std::vector<int> lines);
    ~CombPairSimulator();
    CombPairSimulator(const CombPairSimulator&) = delete;
    CombPairSimulator& operator=(const CombPairSimulator&) = delete;

    void step();

    double tx_phase(int m) const;
    double rx_phase(int m) const;
    double fiber(int m) const;
    double pump() const { return pump_; }
    double rep_tx() const { return rep_tx_; }
    double rep_rx_free() const { return rep_rx_; }
    double correction() const { return correction_; }
    double delta_phi() const { return delta_phi_; }
    bool in_lock() const { return in_lock_; }
    double actuation() const { return actuation_; }
    double rate() const { return rate_; }
    const std::vector<int>& lines() const { return lines_; }

private:
    std::size_t slot(int m) const;

    CoherenceMode mode_;
    double rate_;
    int locked_index_;
    std::vector<int> lines_;
    struct Sources;
    std::unique_ptr<Sources> src_;
    std::vector<double> ff_;
    std::vector<double> laser_tx_;
    std::vector<double> laser_rx_;
    double pump_ = 0.0, rep_tx_ = 0.0, rep_rx_ = 0.0;
    double correction_ = 0.0, delta_phi_ = 0.0, actuation_ = 0.0;
    bool in_lock_ = true;
};

/// Static rep-rate pull that puts the locked line's free-running beat on f_ref.
double static_actuation(const Scenario& s);

/// Control-rate record of one comb-pair realization, starting at t = 0.
struct FramePhases {
    TxCombPhases tx;
    RxCombPhases rx;
    LockResidual residual;
    std::map<int, PhaseTrajectory> tx_line;
    std::map<int, PhaseTrajectory> rx_line;
};

FramePhases simulate_frame_phases(const Scenario& s, CoherenceMode mode, std::uint64_t seed,
                                  const std::vector<int>& lines, std::size_t n);

/// Number of control samples covering warm-up plus one data frame.
std::size_t frame_control_samples(const Scenario& s);

/// One received channel after mixing, noise, FOE, matched filter, AGC and the
/// optional equalizer; CPE not yet applied.
struct ChannelRx {
    int m = 0;
    SymbolFrame frame;
    std::vector<cplx> symbols;
    double foe_applied_hz = 0.0;
};

/// `phases` is required for the comb modes and ignored for IndependentLasers.
ChannelRx receive_channel(const Scenario& s, CoherenceMode mode, std::uint64_t seed, int m,
                          const FramePhases* phases);

/// Pilot CPE at `skip`, decisions and metrics. The FOE error always comes from
/// an every-block (skip 0) trace.
ChannelMetrics evaluate_channel(const ChannelRx& rx, const Scenario& s, int skip, CpeTrace* every_block = nullptr);

struct ChannelRow {
    CoherenceMode mode;
    std::uint64_t seed;
    int skip;
    ChannelMetrics metrics;
};

struct SweepRow {
    CoherenceMode mode;
    std::uint64_t seed;
    int m;
    int skip;
    BerCount ber;
    std::size_t cpe_ops;
};

struct MasterSlaveRow {
    CoherenceMode mode;
    std::uint64_t seed;
    int m;
    int master;
    int skip;
    BerCount individual;
    BerCount slave;
    double static_offset;
};

struct BeatRow {
    CoherenceMode mode;
    std::uint64_t seed;
    int m;
    double nominal_offset;
    Fwhm fwhm;
    double plateau;
    Psd width_psd;    // trimmed around the carrier
    Psd plateau_psd;  // trimmed to psd_span
};

struct AllanRow {
    CoherenceMode mode;
    std::uint64_t seed;
    int m;
    AllanMetrics allan;
};

struct XpmRow {
    bool dispersion;
    double beta2;
    double fwhm_hz;
    double fwhm_ref_hz;
    double broadening_hz;
    double rbw_hz;
    double xpm_phase_rms;
};

struct CpeOpsRow {
    int skip;
    std::size_t channels;
    bool master_slave;
    std::size_t blocks;
    std::size_t ops;
};

struct TraceRow {
    CoherenceMode mode;
    std::uint64_t seed;
    int m;
    double t;
    double phase;  // unwrapped, rad
};

struct RunResult {
    std::vector<ChannelRow> channels;
    std::vector<SweepRow> sweep;
    std::vector<MasterSlaveRow> master_slave;
    std::vector<BeatRow> beat_notes;
    std::vector<AllanRow> allan;
    std::vector<XpmRow> xpm;
    std::vector<CpeOpsRow> cpe_ops;
    std::vector<TraceRow> traces;
    std::size_t out_of_lock_samples = 0;
};

RunResult run_scenario(const Scenario& s, int threads = 1);

/// Largest grid skip factor whose BER, and that of every smaller grid value,
/// stays at or below target. -1 when even the smallest fails.
int max_tolerable_skip(const std::vector<SweepRow>& rows, CoherenceMode mode, std::uint64_t seed, int m,
                       double target);

}  // namespace combsim
