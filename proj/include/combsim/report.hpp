#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "combsim/runner.hpp"
#include "combsim/scenario.hpp"

namespace combsim {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunInfo {
    int threads = 1;
    bool full_scale = false;
    std::string timestamp;  // ISO 8601, UTC
};

/// Writes resolved_config.json, run.json and one CSV per populated result
/// table into `dir` (created if missing). Only run.json carries the thread
/// count and timestamp, so the CSVs of two runs with the same seeds compare
/// byte for byte.
void write_run(const std::string& dir, const Scenario& s, const RunResult& r, const RunInfo& info);

/// Reads a run directory back and condenses it into a JSON summary.
nlohmann::json summarize_run(const std::string& dir);

std::string utc_timestamp();

/// Minimal CSV table: header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace combsim
