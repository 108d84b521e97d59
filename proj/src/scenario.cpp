#include "combsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace combsim {

using nlohmann::json;

const char* to_string(CoherenceMode m) {
    switch (m) {
        case CoherenceMode::LockedCombs: return "LockedCombs";
        case CoherenceMode::UnlockedCombs: return "UnlockedCombs";
        case CoherenceMode::IndependentLasers: return "IndependentLasers";
    }
    return "?";
}

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::Interconnect: return "interconnect";
        case Experiment::CpeSweep: return "cpe_sweep";
        case Experiment::MasterSlave: return "master_slave";
        case Experiment::BeatNotes: return "beat_notes";
        case Experiment::Allan: return "allan";
        case Experiment::Xpm: return "xpm";
        case Experiment::CpeOps: return "cpe_ops";
    }
    return "?";
}

namespace {

const char* to_string(FoeMode m) {
    switch (m) {
        case FoeMode::Precalc: return "Precalc";
        case FoeMode::FourthPower: return "FourthPower";
        case FoeMode::None: return "None";
    }
    return "?";
}

const char* to_string(EqualizerKind k) {
    switch (k) {
        case EqualizerKind::None: return "None";
        case EqualizerKind::LMS: return "LMS";
        case EqualizerKind::Volterra2: return "Volterra2";
    }
    return "?";
}

template <class E, std::size_t N>
E parse_enum(const std::string& s, const std::array<E, N>& all, const std::string& path) {
    for (E e : all)
        if (s == to_string(e)) return e;
    std::string allowed;
    for (E e : all) allowed += std::string(allowed.empty() ? "" : ", ") + to_string(e);
    throw Error(path + ": unknown value '" + s + "' (allowed: " + allowed + ")", path);
}

constexpr std::array<CoherenceMode, 3> kModes{CoherenceMode::LockedCombs, CoherenceMode::UnlockedCombs,
                                              CoherenceMode::IndependentLasers};
constexpr std::array<Experiment, 7> kExperiments{Experiment::Interconnect, Experiment::CpeSweep,
                                                 Experiment::MasterSlave,  Experiment::BeatNotes,
                                                 Experiment::Allan,        Experiment::Xpm,
                                                 Experiment::CpeOps};
constexpr std::array<FoeMode, 3> kFoeModes{FoeMode::Precalc, FoeMode::FourthPower, FoeMode::None};
constexpr std::array<EqualizerKind, 3> kEqualizers{EqualizerKind::None, EqualizerKind::LMS,
                                                   EqualizerKind::Volterra2};

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw Error(where() + " must be an object", where());
    }

    bool has(const char* key) const { return j_.contains(key); }
    void touch(const char* key) { seen_.insert(key); }

    Reader child(const char* key) {
        seen_.insert(key);
        return Reader(j_.at(key), join(key));
    }

    void get(const char* key, double& out) {
        if (!mark(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw Error(join(key) + " must be a number", join(key));
        out = v.get<double>();
        if (!std::isfinite(out)) throw Error(join(key) + " must be finite", join(key));
    }
    void get(const char* key, int& out) {
        if (!mark(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw Error(join(key) + " must be an integer", join(key));
        out = v.get<int>();
    }
    void get(const char* key, std::size_t& out) {
        if (!mark(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw Error(join(key) + " must be a non-negative integer", join(key));
        out = v.get<std::size_t>();
    }
    void get(const char* key, bool& out) {
        if (!mark(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw Error(join(key) + " must be true or false", join(key));
        out = v.get<bool>();
    }
    void get(const char* key, std::string& out) {
        if (!mark(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw Error(join(key) + " must be a string", join(key));
        out = v.get<std::string>();
    }
    template <class T>
    void get(const char* key, std::vector<T>& out) {
        if (!mark(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw Error(join(key) + " must be an array", join(key));
        out.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
            const auto& e = v[k];
            const std::string p = join(key) + "[" + std::to_string(k) + "]";
            if constexpr (std::is_same_v<T, double>) {
                if (!e.is_number()) throw Error(p + " must be a number", p);
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<long long>() >= 0))
                    throw Error(p + " must be a non-negative integer", p);
            } else {
                if (!e.is_number_integer()) throw Error(p + " must be an integer", p);
            }
            out.push_back(e.get<T>());
        }
    }
    template <class E, std::size_t N>
    void get_enum_list(const char* key, std::vector<E>& out, const std::array<E, N>& all) {
        if (!mark(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw Error(join(key) + " must be an array", join(key));
        out.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
            const std::string p = join(key) + "[" + std::to_string(k) + "]";
            if (!v[k].is_string()) throw Error(p + " must be a string", p);
            out.push_back(parse_enum(v[k].get<std::string>(), all, p));
        }
    }
    template <class E, std::size_t N>
    void get_enum(const char* key, E& out, const std::array<E, N>& all) {
        std::string s;
        get(key, s);
        if (!s.empty()) out = parse_enum(s, all, join(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw Error(join(it.key().c_str()) + ": unknown field", join(it.key().c_str()));
    }

    std::string join(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

private:
    bool mark(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Validation errors from the module structs carry the bare field name; prefix
// it with the config section.
template <class F>
void scoped(const std::string& section, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        const std::string field = e.field().empty() ? section : section + "." + e.field();
        throw Error(field + ": " + e.what(), field);
    }
}

void read_comb(Reader r, CombSpec& c) {
    r.get("pump_frequency", c.pump_frequency);
    r.get("mode_spacing", c.mode_spacing);
    r.get("line_indices", c.line_indices);
    r.finish();
}

void read_noise(Reader r, PhaseNoiseParams& n) {
    r.get("pump_linewidth", n.pump_linewidth);
    r.get("rep_rate_jitter_rms", n.rep_rate_jitter_rms);
    r.get("rep_rate_corner", n.rep_rate_corner);
    r.get("fiber_fluct_rms", n.fiber_fluct_rms);
    r.get("fiber_fluct_corner", n.fiber_fluct_corner);
    r.finish();
}

json noise_json(const PhaseNoiseParams& n) {
    return {{"pump_linewidth", n.pump_linewidth},
            {"rep_rate_jitter_rms", n.rep_rate_jitter_rms},
            {"rep_rate_corner", n.rep_rate_corner},
            {"fiber_fluct_rms", n.fiber_fluct_rms},
            {"fiber_fluct_corner", n.fiber_fluct_corner}};
}

}  // namespace

std::vector<int> default_channels() {
    std::vector<int> out;
    for (int m = -11; m <= -2; ++m) out.push_back(m);
    for (int m = 2; m <= 11; ++m) out.push_back(m);
    return out;
}

Scenario::Scenario() {
    for (int m = -20; m <= 20; ++m) comb_tx.line_indices.push_back(m);
    comb_rx = comb_tx;
    comb_rx.mode_spacing = 100.58e9;
    comb_rx.role = CombRole::Receiver;
    channels = default_channels();
}

std::vector<CoherenceMode> Scenario::modes() const {
    return sweep.modes.empty() ? std::vector<CoherenceMode>{coherence_mode} : sweep.modes;
}

void Scenario::validate() const {
    if (name.empty()) throw Error("name must not be empty", "name");
    if (!(control_rate > 0.0)) throw Error("control_rate must be positive", "control_rate");
    if (!(warmup >= 0.0)) throw Error("warmup must be >= 0", "warmup");
    if (!(independent_linewidth >= 0.0)) throw Error("independent_linewidth must be >= 0", "independent_linewidth");
    scoped("comb_tx", [&] { comb_tx.validate(); });
    scoped("comb_rx", [&] { comb_rx.validate(); });
    scoped("noise", [&] { noise.validate(control_rate); });
    scoped("lock", [&] { lock.validate(control_rate); });
    scoped("link", [&] {
        link.validate();
    });
    scoped("mod", [&] { mod.validate(); });
    if (dsp.cpe_block != mod.pilot_block) throw Error("dsp.cpe_block must equal mod.pilot_block", "dsp.cpe_block");
    if (seeds.empty()) throw Error("seeds must not be empty", "seeds");

    const auto check_line = [&](int m, const std::string& path) {
        if (m == 0) throw Error(path + ": channel 0 is the unmodulated pump", path);
        if (m == lock.locked_index) throw Error(path + ": the locked line carries the pilot, not data", path);
        if (!comb_tx.has_line(m) || !comb_rx.has_line(m))
            throw Error(path + ": line " + std::to_string(m) + " is not part of both combs", path);
    };
    if (channels.empty()) throw Error("channels must not be empty", "channels");
    std::set<int> seen;
    for (std::size_t k = 0; k < channels.size(); ++k) {
        const std::string path = "channels[" + std::to_string(k) + "]";
        check_line(channels[k], path);
        if (!seen.insert(channels[k]).second) throw Error(path + ": duplicate channel", path);
    }
    // The master estimates for the others; the locked line is never a data
    // channel, so it stands in for "own channel" here.
    scoped("dsp", [&] { dsp.validate(lock.locked_index); });
    if (dsp.master_channel && !seen.count(*dsp.master_channel))
        throw Error("dsp.master_channel is not an active channel", "dsp.master_channel");
    for (std::size_t k = 0; k < trace_channels.size(); ++k)
        if (!seen.count(trace_channels[k]))
            throw Error("trace_channels[" + std::to_string(k) + "] is not an active channel",
                        "trace_channels[" + std::to_string(k) + "]");

    if (!comb_tx.has_line(lock.locked_index) || !comb_rx.has_line(lock.locked_index))
        throw Error("lock.locked_index is not part of both combs", "lock.locked_index");
    const double free_beat = lock.locked_index * (comb_rx.mode_spacing - comb_tx.mode_spacing);
    if (std::abs(lock.f_ref - free_beat) / std::abs(lock.locked_index) > lock.actuator_range)
        throw Error("lock.actuator_range cannot pull the locked beat onto f_ref", "lock.actuator_range");

    for (std::size_t k = 0; k < sweep.skip_blocks.size(); ++k)
        if (sweep.skip_blocks[k] < 0)
            throw Error("sweep.skip_blocks entries must be >= 0", "sweep.skip_blocks[" + std::to_string(k) + "]");
    if (!(sweep.target_ber > 0.0 && sweep.target_ber < 1.0))
        throw Error("sweep.target_ber must lie in (0, 1)", "sweep.target_ber");

    const double dec_rate = control_rate / std::max(beat_notes.decimation, 1);
    if (beat_notes.decimation < 1) throw Error("beat_notes.decimation must be >= 1", "beat_notes.decimation");
    if (!(beat_notes.duration > 0.0)) throw Error("beat_notes.duration must be positive", "beat_notes.duration");
    if (!(beat_notes.plateau_duration > 0.0))
        throw Error("beat_notes.plateau_duration must be positive", "beat_notes.plateau_duration");
    for (auto [rbw, path] : {std::pair{beat_notes.rbw_locked, "beat_notes.rbw_locked"},
                             std::pair{beat_notes.rbw_unlocked, "beat_notes.rbw_unlocked"}}) {
        if (!(rbw > 0.0) || rbw * beat_notes.duration < 1.0 - 1e-9)
            throw Error(std::string(path) + " is finer than beat_notes.duration allows", path);
        if (dec_rate / rbw < 4.0) throw Error(std::string(path) + " is too coarse for the decimated rate", path);
    }
    if (!(beat_notes.plateau_rbw * beat_notes.plateau_duration >= 1.0 - 1e-9))
        throw Error("beat_notes.plateau_rbw is finer than plateau_duration allows", "beat_notes.plateau_rbw");
    if (!(beat_notes.plateau_lo >= 0.0 && beat_notes.plateau_hi > beat_notes.plateau_lo &&
          beat_notes.plateau_hi < control_rate / 2.0))
        throw Error("beat_notes plateau band must satisfy 0 <= lo < hi < control_rate / 2", "beat_notes.plateau_hi");
    for (std::size_t k = 0; k < beat_notes.lines.size(); ++k)
        if (!comb_tx.has_line(beat_notes.lines[k]) || !comb_rx.has_line(beat_notes.lines[k]))
            throw Error("beat_notes.lines entry is not part of both combs",
                        "beat_notes.lines[" + std::to_string(k) + "]");

    if (!(allan.tau0 > 0.0) || allan.tau0 * control_rate < 1.0 - 1e-9)
        throw Error("allan.tau0 must be at least one control sample", "allan.tau0");
    for (std::size_t k = 0; k < allan.gates.size(); ++k) {
        const std::string path = "allan.gates[" + std::to_string(k) + "]";
        const double n = allan.gates[k] / allan.tau0;
        if (!(n >= 1.0) || std::abs(n - std::round(n)) > 1e-6 * n)
            throw Error(path + " must be a positive multiple of allan.tau0", path);
        if (allan.duration < 2.0 * allan.gates[k] + allan.tau0)
            throw Error(path + " needs allan.duration >= 2 gates", path);
    }
    for (std::size_t k = 0; k < allan.lines.size(); ++k)
        if (!comb_tx.has_line(allan.lines[k]) || !comb_rx.has_line(allan.lines[k]))
            throw Error("allan.lines entry is not part of both combs", "allan.lines[" + std::to_string(k) + "]");

    if (xpm.symbols < 64) throw Error("xpm.symbols must be >= 64", "xpm.symbols");
    if (xpm.samples_per_symbol < 2) throw Error("xpm.samples_per_symbol must be >= 2", "xpm.samples_per_symbol");
    if (!(xpm.baud > 0.0)) throw Error("xpm.baud must be positive", "xpm.baud");
    if (xpm.steps < 1) throw Error("xpm.steps must be >= 1", "xpm.steps");
    if (xpm.welch_segments < 1) throw Error("xpm.welch_segments must be >= 1", "xpm.welch_segments");
    for (std::size_t k = 0; k < xpm.data_lines.size(); ++k)
        if (xpm.data_lines[k] == 0)
            throw Error("xpm.data_lines must not overlap the pilot", "xpm.data_lines[" + std::to_string(k) + "]");

    if (master_slave.master == 0) throw Error("master_slave.master must be nonzero", "master_slave.master");
    for (std::size_t k = 0; k < master_slave.slaves.size(); ++k) {
        const std::string path = "master_slave.slaves[" + std::to_string(k) + "]";
        if (master_slave.slaves[k] == master_slave.master) throw Error(path + " equals the master", path);
        check_line(master_slave.slaves[k], path);
    }
    check_line(master_slave.master, "master_slave.master");
    for (std::size_t k = 0; k < master_slave.skip_blocks.size(); ++k)
        if (master_slave.skip_blocks[k] < 0)
            throw Error("master_slave.skip_blocks entries must be >= 0",
                        "master_slave.skip_blocks[" + std::to_string(k) + "]");

    if (master_slave.calibration_blocks == 0)
        throw Error("master_slave.calibration_blocks must be >= 1", "master_slave.calibration_blocks");
    if (cpe_ops.frame_length == 0) throw Error("cpe_ops.frame_length must be positive", "cpe_ops.frame_length");
    for (std::size_t k = 0; k < cpe_ops.cases.size(); ++k)
        if (cpe_ops.cases[k].skip_blocks < 0 || cpe_ops.cases[k].channels == 0)
            throw Error("cpe_ops case needs skip_blocks >= 0 and channels >= 1",
                        "cpe_ops.cases[" + std::to_string(k) + "]");
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    Reader r(j, "");
    r.get("name", s.name);
    r.get_enum("experiment", s.experiment, kExperiments);
    r.get_enum("coherence_mode", s.coherence_mode, kModes);
    if (r.has("comb_tx")) read_comb(r.child("comb_tx"), s.comb_tx);
    if (r.has("comb_rx")) read_comb(r.child("comb_rx"), s.comb_rx);
    if (r.has("noise")) read_noise(r.child("noise"), s.noise);
    if (r.has("lock")) {
        auto c = r.child("lock");
        c.get("locked_index", s.lock.locked_index);
        c.get("f_ref", s.lock.f_ref);
        c.get("loop_bandwidth", s.lock.loop_bandwidth);
        std::string loop = "PI";
        c.get("loop_type", loop);
        if (loop != "PI") throw Error("lock.loop_type: only PI is supported", "lock.loop_type");
        c.get("actuator_range", s.lock.actuator_range);
        c.get("enabled", s.lock.enabled);
        c.get("phase_margin_deg", s.lock.phase_margin_deg);
        c.get("lock_threshold", s.lock.lock_threshold);
        c.get("detector_noise_psd", s.lock.detector_noise_psd);
        c.get("comparator_bandwidth", s.lock.comparator_bandwidth);
        c.finish();
    }
    if (r.has("link")) {
        auto c = r.child("link");
        auto& l = s.link;
        c.get("length", l.length);
        c.get("beta2", l.beta2);
        c.get("beta3", l.beta3);
        c.get("gamma", l.gamma);
        c.get("alpha", l.alpha);
        c.get("launch_power_dbm", l.launch_power_dbm);
        c.get("ocnr_db", l.ocnr_db);
        c.get("ocnr_ref_bandwidth", l.ocnr_ref_bandwidth);
        c.get("ase_psd", l.ase_psd);
        c.get("rx_snr_db", l.rx_snr_db);
        c.get("reference_frequency", l.reference_frequency);
        c.get("grid_spacing", l.grid_spacing);
        c.get("walkoff_decorrelation", l.walkoff_decorrelation);
        c.get("split_steps", l.split_steps);
        c.finish();
    }
    if (r.has("mod")) {
        auto c = r.child("mod");
        c.get("baud", s.mod.baud);
        std::string fmt = "QAM16", pulse = "Rectangle";
        c.get("format", fmt);
        c.get("pulse_shape", pulse);
        if (fmt != "QAM16") throw Error("mod.format: only QAM16 is supported", "mod.format");
        if (pulse != "Rectangle") throw Error("mod.pulse_shape: only Rectangle is supported", "mod.pulse_shape");
        c.get("samples_per_symbol", s.mod.samples_per_symbol);
        c.get("frame_length", s.mod.frame_length);
        c.get("pilot_block", s.mod.pilot_block);
        c.finish();
    }
    if (r.has("dsp")) {
        auto c = r.child("dsp");
        auto& d = s.dsp;
        c.get("cpe_block", d.cpe_block);
        c.get("skip_blocks", d.skip_blocks);
        c.get_enum("foe_mode", d.foe_mode, kFoeModes);
        if (c.has("master_channel")) {
            int m = 0;
            c.get("master_channel", m);
            d.master_channel = m;
        }
        c.get_enum("equalizer", d.equalizer, kEqualizers);
        c.get("taps", d.taps);
        c.get("volterra_memory", d.volterra_memory);
        c.get("step_size", d.step_size);
        c.get("training_symbols", d.training_symbols);
        c.finish();
    }
    r.get("channels", s.channels);
    r.get("seeds", s.seeds);
    if (r.has("sweep")) {
        auto c = r.child("sweep");
        c.get("skip_blocks", s.sweep.skip_blocks);
        c.get_enum_list("modes", s.sweep.modes, kModes);
        c.get("target_ber", s.sweep.target_ber);
        c.finish();
    }
    if (r.has("beat_notes")) {
        auto c = r.child("beat_notes");
        auto& b = s.beat_notes;
        c.get("lines", b.lines);
        c.get("duration", b.duration);
        c.get("decimation", b.decimation);
        c.get("rbw_locked", b.rbw_locked);
        c.get("rbw_unlocked", b.rbw_unlocked);
        c.get("plateau_duration", b.plateau_duration);
        c.get("plateau_rbw", b.plateau_rbw);
        c.get("plateau_lo", b.plateau_lo);
        c.get("plateau_hi", b.plateau_hi);
        c.get("psd_span", b.psd_span);
        c.finish();
    }
    if (r.has("allan")) {
        auto c = r.child("allan");
        c.get("lines", s.allan.lines);
        c.get("duration", s.allan.duration);
        c.get("tau0", s.allan.tau0);
        c.get("gates", s.allan.gates);
        c.finish();
    }
    if (r.has("xpm")) {
        auto c = r.child("xpm");
        c.get("data_lines", s.xpm.data_lines);
        c.get("symbols", s.xpm.symbols);
        c.get("samples_per_symbol", s.xpm.samples_per_symbol);
        c.get("baud", s.xpm.baud);
        c.get("steps", s.xpm.steps);
        c.get("welch_segments", s.xpm.welch_segments);
        c.finish();
    }
    if (r.has("master_slave")) {
        auto c = r.child("master_slave");
        c.get("master", s.master_slave.master);
        c.get("slaves", s.master_slave.slaves);
        c.get("skip_blocks", s.master_slave.skip_blocks);
        c.get("calibration_blocks", s.master_slave.calibration_blocks);
        c.finish();
    }
    if (r.has("cpe_ops")) {
        auto c = r.child("cpe_ops");
        c.get("frame_length", s.cpe_ops.frame_length);
        if (c.has("cases")) {
            const auto& arr = j.at("cpe_ops").at("cases");
            if (!arr.is_array()) throw Error("cpe_ops.cases must be an array", "cpe_ops.cases");
            c.touch("cases");
            s.cpe_ops.cases.clear();
            for (std::size_t k = 0; k < arr.size(); ++k) {
                Reader e(arr[k], "cpe_ops.cases[" + std::to_string(k) + "]");
                CpeOpsCase cs;
                e.get("skip_blocks", cs.skip_blocks);
                e.get("channels", cs.channels);
                e.get("master_slave", cs.master_slave);
                e.finish();
                s.cpe_ops.cases.push_back(cs);
            }
        }
        c.finish();
    }
    r.get("control_rate", s.control_rate);
    r.get("warmup", s.warmup);
    r.get("independent_linewidth", s.independent_linewidth);
    r.get("simulate_dispersion", s.simulate_dispersion);
    r.get("trace_channels", s.trace_channels);
    r.finish();
    s.comb_tx.role = CombRole::Transmitter;
    s.comb_rx.role = CombRole::Receiver;
    s.link.fluct = s.noise;
    s.validate();
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["experiment"] = to_string(s.experiment);
    j["coherence_mode"] = to_string(s.coherence_mode);
    const auto comb = [](const CombSpec& c) {
        return json{{"pump_frequency", c.pump_frequency}, {"mode_spacing", c.mode_spacing},
                    {"line_indices", c.line_indices}};
    };
    j["comb_tx"] = comb(s.comb_tx);
    j["comb_rx"] = comb(s.comb_rx);
    j["noise"] = noise_json(s.noise);
    j["lock"] = {{"locked_index", s.lock.locked_index},
                 {"f_ref", s.lock.f_ref},
                 {"loop_bandwidth", s.lock.loop_bandwidth},
                 {"loop_type", "PI"},
                 {"actuator_range", s.lock.actuator_range},
                 {"enabled", s.lock.enabled},
                 {"phase_margin_deg", s.lock.phase_margin_deg},
                 {"lock_threshold", s.lock.lock_threshold},
                 {"detector_noise_psd", s.lock.detector_noise_psd},
                 {"comparator_bandwidth", s.lock.comparator_bandwidth}};
    const auto& l = s.link;
    j["link"] = {{"length", l.length},
                 {"beta2", l.beta2},
                 {"beta3", l.beta3},
                 {"gamma", l.gamma},
                 {"alpha", l.alpha},
                 {"launch_power_dbm", l.launch_power_dbm},
                 {"ocnr_db", l.ocnr_db},
                 {"ocnr_ref_bandwidth", l.ocnr_ref_bandwidth},
                 {"ase_psd", l.ase_psd},
                 {"rx_snr_db", l.rx_snr_db},
                 {"reference_frequency", l.reference_frequency},
                 {"grid_spacing", l.grid_spacing},
                 {"walkoff_decorrelation", l.walkoff_decorrelation},
                 {"split_steps", l.split_steps}};
    j["mod"] = {{"baud", s.mod.baud},
                {"format", "QAM16"},
                {"pulse_shape", "Rectangle"},
                {"samples_per_symbol", s.mod.samples_per_symbol},
                {"frame_length", s.mod.frame_length},
                {"pilot_block", s.mod.pilot_block}};
    const auto& d = s.dsp;
    j["dsp"] = {{"cpe_block", d.cpe_block},
                {"skip_blocks", d.skip_blocks},
                {"foe_mode", to_string(d.foe_mode)},
                {"equalizer", to_string(d.equalizer)},
                {"taps", d.taps},
                {"volterra_memory", d.volterra_memory},
                {"step_size", d.step_size},
                {"training_symbols", d.training_symbols}};
    if (d.master_channel) j["dsp"]["master_channel"] = *d.master_channel;
    j["channels"] = s.channels;
    j["seeds"] = s.seeds;
    json modes = json::array();
    for (auto m : s.sweep.modes) modes.push_back(to_string(m));
    j["sweep"] = {{"skip_blocks", s.sweep.skip_blocks}, {"modes", modes}, {"target_ber", s.sweep.target_ber}};
    const auto& b = s.beat_notes;
    j["beat_notes"] = {{"lines", b.lines},
                       {"duration", b.duration},
                       {"decimation", b.decimation},
                       {"rbw_locked", b.rbw_locked},
                       {"rbw_unlocked", b.rbw_unlocked},
                       {"plateau_duration", b.plateau_duration},
                       {"plateau_rbw", b.plateau_rbw},
                       {"plateau_lo", b.plateau_lo},
                       {"plateau_hi", b.plateau_hi},
                       {"psd_span", b.psd_span}};
    j["allan"] = {{"lines", s.allan.lines},
                  {"duration", s.allan.duration},
                  {"tau0", s.allan.tau0},
                  {"gates", s.allan.gates}};
    j["xpm"] = {{"data_lines", s.xpm.data_lines},
                {"symbols", s.xpm.symbols},
                {"samples_per_symbol", s.xpm.samples_per_symbol},
                {"baud", s.xpm.baud},
                {"steps", s.xpm.steps},
                {"welch_segments", s.xpm.welch_segments}};
    j["master_slave"] = {{"master", s.master_slave.master},
                         {"slaves", s.master_slave.slaves},
                         {"skip_blocks", s.master_slave.skip_blocks},
                         {"calibration_blocks", s.master_slave.calibration_blocks}};
    json cases = json::array();
    for (const auto& c : s.cpe_ops.cases)
        cases.push_back({{"skip_blocks", c.skip_blocks}, {"channels", c.channels}, {"master_slave", c.master_slave}});
    j["cpe_ops"] = {{"frame_length", s.cpe_ops.frame_length}, {"cases", cases}};
    j["control_rate"] = s.control_rate;
    j["warmup"] = s.warmup;
    j["independent_linewidth"] = s.independent_linewidth;
    j["simulate_dispersion"] = s.simulate_dispersion;
    j["trace_channels"] = s.trace_channels;
    return j;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path, "config");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what(), "config");
    }
    return scenario_from_json(j);
}

void apply_full_scale(Scenario& s) {
    s.mod.baud = 21.0e9;
    s.channels = default_channels();
    std::erase_if(s.trace_channels, [&](int m) {
        return std::find(s.channels.begin(), s.channels.end(), m) == s.channels.end();
    });
}

}  // namespace combsim
