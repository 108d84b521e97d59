#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "combsim/channel.hpp"
#include "combsim/comb.hpp"
#include "combsim/dsp.hpp"
#include "combsim/locking.hpp"
#include "combsim/txrx.hpp"

namespace combsim {

enum class CoherenceMode { LockedCombs, UnlockedCombs, IndependentLasers };
enum class Experiment { Interconnect, CpeSweep, MasterSlave, BeatNotes, Allan, Xpm, CpeOps };

const char* to_string(CoherenceMode m);
const char* to_string(Experiment e);

struct SweepSpec {
    std::vector<int> skip_blocks{0, 1, 10, 100, 1000, 5000};
    std::vector<CoherenceMode> modes;  // empty: the scenario's coherence_mode only
    double target_ber = 3.8e-3;
};

struct BeatNoteSpec {
    std::vector<int> lines{1, 5, 10, 17};
    double duration = 4.0;           // s, record for the width estimate
    int decimation = 20;             // control samples averaged per width-record sample
    double rbw_locked = 1.0;         // Hz
    double rbw_unlocked = 100.0;     // Hz
    double plateau_duration = 0.5;   // s, full-rate record for the plateau estimate
    double plateau_rbw = 1.0e3;      // Hz
    double plateau_lo = 10.0e3;      // Hz from the carrier
    double plateau_hi = 50.0e3;      // Hz from the carrier
    double psd_span = 50.0e3;        // Hz either side of the carrier written to psd.csv
};

struct AllanSpec {
    std::vector<int> lines{1, 5};
    double duration = 100.0;  // s
    double tau0 = 1.0e-3;     // s
    std::vector<double> gates{1e-3, 1e-2, 1e-1, 1.0, 10.0};
};

struct XpmSpec {
    std::vector<int> data_lines{-1, 1, 2};  // grid offsets from the pilot
    std::size_t symbols = 4096;
    int samples_per_symbol = 32;
    double baud = 21.0e9;
    int steps = 200;
    std::size_t welch_segments = 4;  // record length / segment length
};

struct MasterSlaveSpec {
    int master = 10;
    std::vector<int> slaves{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> skip_blocks{1000};
    std::size_t calibration_blocks = 16;  // pilot blocks averaged for each slave's static offset
};

struct CpeOpsCase {
    int skip_blocks = 0;
    std::size_t channels = 1;
    bool master_slave = false;
};

struct CpeOpsSpec {
    std::size_t frame_length = 400000;
    std::vector<CpeOpsCase> cases{{1000, 10, true}, {10, 10, false}};
};

struct Scenario {
    std::string name = "default";
    Experiment experiment = Experiment::Interconnect;
    CoherenceMode coherence_mode = CoherenceMode::LockedCombs;
    CombSpec comb_tx{};
    CombSpec comb_rx{};
    PhaseNoiseParams noise{};
    LockConfig lock{};
    LinkConfig link{};
    ModulationConfig mod{};
    DspConfig dsp{};
    std::vector<int> channels;
    std::vector<std::uint64_t> seeds{1};
    SweepSpec sweep{};
    BeatNoteSpec beat_notes{};
    AllanSpec allan{};
    XpmSpec xpm{};
    MasterSlaveSpec master_slave{};
    CpeOpsSpec cpe_ops{};
    double control_rate = 2.0e6;           // Hz
    double warmup = 1.0e-3;                // s of servo settling before the data frame
    double independent_linewidth = 25.0e3; // Hz per laser, IndependentLasers mode
    bool simulate_dispersion = false;      // disperse and compensate the data waveform
    std::vector<int> trace_channels;       // channels whose CPE phase trace is written

    Scenario();

    /// Throws Error with a dotted field path on the first violation.
    void validate() const;
    std::vector<CoherenceMode> modes() const;
};

/// Strict parse: unknown keys and wrong types are errors naming the path.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario(const std::string& path);

/// 21 Gbaud and the twenty channels +-2..+-11; trace channels outside that
/// set are dropped.
void apply_full_scale(Scenario& s);

std::vector<int> default_channels();

}  // namespace combsim
