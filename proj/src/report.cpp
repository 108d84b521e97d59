#include "combsim/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace combsim {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot write " + path.string(), "out");
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::string u(std::uint64_t v) { return std::to_string(v); }
std::string i(long long v) { return std::to_string(v); }

void write_json(const fs::path& p, const nlohmann::json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string(), "out");
    out << j.dump(2) << '\n';
}

}  // namespace

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_run(const std::string& dir, const Scenario& s, const RunResult& r, const RunInfo& info) {
    const fs::path d(dir);
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message(), "out");

    write_json(d / "resolved_config.json", scenario_to_json(s));
    write_json(d / "run.json", {{"tool", "combsim"},
                                {"tool_version", kToolVersion},
                                {"scenario", s.name},
                                {"experiment", to_string(s.experiment)},
                                {"seeds", s.seeds},
                                {"threads", info.threads},
                                {"full_scale", info.full_scale},
                                {"timestamp", info.timestamp},
                                {"out_of_lock_samples", r.out_of_lock_samples}});

    // series, mode, seed, m, x, y: every plottable curve in one table.
    CsvWriter lng(d / "long.csv", {"series", "mode", "seed", "m", "x", "y"});

    if (!r.channels.empty()) {
        CsvWriter w(d / "channels.csv", {"mode", "seed", "m", "skip", "ber", "errors", "bits", "snr_db", "evm_pct",
                                         "foe_error_hz", "cpe_ops", "cycle_slips"});
        for (const auto& c : r.channels) {
            const auto& x = c.metrics;
            w.row({to_string(c.mode), u(c.seed), i(x.m), i(c.skip), num(x.ber.ratio()), u(x.ber.errors),
                   u(x.ber.bits), num(x.snr_db), num(x.evm_pct), num(x.foe_error_hz), u(x.cpe_ops),
                   u(x.cycle_slips)});
            lng.row({"ber_vs_channel", to_string(c.mode), u(c.seed), i(x.m), i(x.m), num(x.ber.ratio())});
            lng.row({"foe_error_vs_channel", to_string(c.mode), u(c.seed), i(x.m), i(x.m), num(x.foe_error_hz)});
        }
    }
    if (!r.sweep.empty()) {
        CsvWriter w(d / "sweep.csv", {"mode", "seed", "m", "skip", "ber", "errors", "bits", "cpe_ops"});
        for (const auto& x : r.sweep) {
            w.row({to_string(x.mode), u(x.seed), i(x.m), i(x.skip), num(x.ber.ratio()), u(x.ber.errors),
                   u(x.ber.bits), u(x.cpe_ops)});
            lng.row({"ber_vs_skip", to_string(x.mode), u(x.seed), i(x.m), i(x.skip), num(x.ber.ratio())});
        }
    }
    if (!r.master_slave.empty()) {
        CsvWriter w(d / "master_slave.csv",
                    {"mode", "seed", "m", "master", "skip", "ber_individual", "ber_slave", "static_offset_rad"});
        for (const auto& x : r.master_slave) {
            w.row({to_string(x.mode), u(x.seed), i(x.m), i(x.master), i(x.skip), num(x.individual.ratio()),
                   num(x.slave.ratio()), num(x.static_offset)});
            lng.row({"ber_individual", to_string(x.mode), u(x.seed), i(x.m), i(x.m), num(x.individual.ratio())});
            lng.row({"ber_slave", to_string(x.mode), u(x.seed), i(x.m), i(x.m), num(x.slave.ratio())});
        }
    }
    if (!r.beat_notes.empty()) {
        CsvWriter w(d / "beat_notes.csv", {"mode", "seed", "m", "nominal_offset_hz", "fwhm_hz", "rbw_hz",
                                           "resolution_limited", "plateau_per_hz"});
        CsvWriter p(d / "psd.csv", {"mode", "seed", "m", "record", "freq_hz", "psd_per_hz"});
        for (const auto& x : r.beat_notes) {
            w.row({to_string(x.mode), u(x.seed), i(x.m), num(x.nominal_offset), num(x.fwhm.hz), num(x.fwhm.rbw),
                   x.fwhm.resolution_limited ? "1" : "0", num(x.plateau)});
            for (const auto* rec : {&x.width_psd, &x.plateau_psd}) {
                const char* name = rec == &x.width_psd ? "width" : "plateau";
                for (std::size_t k = 0; k < rec->freq.size(); ++k) {
                    p.row({to_string(x.mode), u(x.seed), i(x.m), name, num(rec->freq[k]), num(rec->density[k])});
                    lng.row({std::string("psd_") + name, to_string(x.mode), u(x.seed), i(x.m), num(rec->freq[k]),
                             num(rec->density[k])});
                }
            }
        }
    }
    if (!r.allan.empty()) {
        CsvWriter w(d / "allan.csv", {"mode", "seed", "m", "gate_s", "adev_hz"});
        for (const auto& x : r.allan)
            for (std::size_t k = 0; k < x.allan.gate_times_s.size(); ++k) {
                w.row({to_string(x.mode), u(x.seed), i(x.m), num(x.allan.gate_times_s[k]),
                       num(x.allan.deviations[k])});
                lng.row({"adev", to_string(x.mode), u(x.seed), i(x.m), num(x.allan.gate_times_s[k]),
                         num(x.allan.deviations[k])});
            }
    }
    if (!r.xpm.empty()) {
        CsvWriter w(d / "xpm.csv", {"dispersion", "beta2_s2_per_m", "fwhm_hz", "fwhm_ref_hz", "broadening_hz",
                                    "rbw_hz", "xpm_phase_rms_rad"});
        for (const auto& x : r.xpm)
            w.row({x.dispersion ? "1" : "0", num(x.beta2), num(x.fwhm_hz), num(x.fwhm_ref_hz),
                   num(x.broadening_hz), num(x.rbw_hz), num(x.xpm_phase_rms)});
    }
    if (!r.cpe_ops.empty()) {
        CsvWriter w(d / "cpe_ops.csv", {"skip", "channels", "master_slave", "blocks", "ops"});
        for (const auto& x : r.cpe_ops)
            w.row({i(x.skip), u(x.channels), x.master_slave ? "1" : "0", u(x.blocks), u(x.ops)});
    }
    if (!r.traces.empty()) {
        CsvWriter w(d / "traces.csv", {"mode", "seed", "m", "t_s", "phase_rad"});
        for (const auto& x : r.traces) {
            w.row({to_string(x.mode), u(x.seed), i(x.m), num(x.t), num(x.phase)});
            lng.row({"cpe_phase", to_string(x.mode), u(x.seed), i(x.m), num(x.t), num(x.phase)});
        }
    }
}

// ---------------------------------------------------------------------------

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw Error("CSV has no column '" + name + "'", name);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path, "path");
    CsvTable t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        return cells;
    };
    if (!std::getline(in, line)) throw Error(path + " is empty", "path");
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) throw Error(path + ": ragged row", "path");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

nlohmann::json summarize_run(const std::string& dir) {
    const fs::path d(dir);
    if (!fs::exists(d / "run.json")) throw Error(dir + " holds no run.json", "run_dir");
    nlohmann::json out;
    {
        std::ifstream in(d / "run.json");
        out["run"] = nlohmann::json::parse(in);
    }
    nlohmann::json files = nlohmann::json::object();
    for (const auto& e : fs::directory_iterator(d))
        if (e.path().extension() == ".csv") files[e.path().filename().string()] = read_csv(e.path().string()).rows.size();
    out["files"] = files;

    if (fs::exists(d / "channels.csv")) {
        const auto t = read_csv((d / "channels.csv").string());
        const auto cm = t.column("mode"), ce = t.column("errors"), cb = t.column("bits"), cf = t.column("foe_error_hz");
        struct Acc {
            double errors = 0, bits = 0, foe2 = 0, worst = 0;
            std::size_t n = 0;
        };
        std::map<std::string, Acc> acc;
        for (const auto& r : t.rows) {
            auto& a = acc[r[cm]];
            a.errors += std::stod(r[ce]);
            a.bits += std::stod(r[cb]);
            const double f = std::stod(r[cf]);
            a.foe2 += f * f;
            a.worst = std::max(a.worst, std::abs(f));
            ++a.n;
        }
        for (const auto& [mode, a] : acc)
            out["channels"][mode] = {{"rows", a.n},
                                     {"ber", a.bits > 0 ? a.errors / a.bits : 0.0},
                                     {"foe_error_rms_hz", std::sqrt(a.foe2 / static_cast<double>(a.n))},
                                     {"foe_error_max_hz", a.worst}};
    }
    if (fs::exists(d / "beat_notes.csv")) {
        const auto t = read_csv((d / "beat_notes.csv").string());
        const auto cm = t.column("mode"), cl = t.column("m"), cw = t.column("fwhm_hz"), cp = t.column("plateau_per_hz");
        for (const auto& r : t.rows)
            out["beat_notes"].push_back(
                {{"mode", r[cm]}, {"m", std::stoi(r[cl])}, {"fwhm_hz", std::stod(r[cw])}, {"plateau", std::stod(r[cp])}});
    }
    if (fs::exists(d / "allan.csv")) {
        const auto t = read_csv((d / "allan.csv").string());
        const auto cm = t.column("mode"), cl = t.column("m"), cg = t.column("gate_s"), ca = t.column("adev_hz");
        for (const auto& r : t.rows)
            out["allan"].push_back(
                {{"mode", r[cm]}, {"m", std::stoi(r[cl])}, {"gate_s", std::stod(r[cg])}, {"adev_hz", std::stod(r[ca])}});
    }
    return out;
}

}  // namespace combsim
