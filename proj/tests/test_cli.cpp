#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Out {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("combsim_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Out run(const std::string& args, const std::string& env = "") {
    const auto d = scratch("io");
    const auto o = d / "stdout", e = d / "stderr";
    const std::string cmd = env + " " + COMBSIM_BIN + " " + args + " >" + o.string() + " 2>" + e.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

fs::path write_config(const std::string& name, const nlohmann::json& j) {
    const auto p = scratch("cfg_" + name) / (name + ".json");
    std::ofstream(p) << j.dump();
    return p;
}

nlohmann::json small_run(const std::string& name) {
    return {{"name", name},
            {"channels", {1, 5}},
            {"seeds", {1, 2}},
            {"warmup", 2e-4},
            {"mod", {{"frame_length", 3200}}}};
}

std::size_t rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n - 1;
}

}  // namespace

TEST_CASE("validate reports a bad channel as JSON on stderr") {
    auto j = small_run("bad");
    j["channels"] = {3, 0};
    const auto r = run("validate " + write_config("bad", j).string());
    CHECK(r.code == 2);
    const auto e = nlohmann::json::parse(r.err);
    CHECK(e["field"] == "channels[1]");
    CHECK(e["error"].get<std::string>().find("pump") != std::string::npos);
}

TEST_CASE("validate prints the resolved config") {
    const auto r = run("validate --config " + write_config("ok", small_run("ok")).string() + " --seed 9");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["seeds"] == nlohmann::json::array({9}));
    CHECK(j["lock"]["f_ref"] == 941.101e6);
}

TEST_CASE("Unknown flags and missing subcommands are argument errors") {
    const auto r = run("run --bogus");
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["field"] == "args");
    CHECK(run("").code == 2);
    const auto v = run("--version");
    CHECK(v.code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("Two runs with different thread counts write identical tables") {
    const auto cfg = write_config("twice", small_run("twice"));
    const auto a = scratch("run_a"), b = scratch("run_b");
    REQUIRE(run("run " + cfg.string() + " --threads 1 --out " + a.string()).code == 0);
    REQUIRE(run("run " + cfg.string() + " --threads 3 --out " + b.string()).code == 0);
    for (const char* f : {"channels.csv", "long.csv", "resolved_config.json"}) {
        INFO(f);
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(rows(a / "channels.csv") == 4);
    const auto info = nlohmann::json::parse(slurp(a / "run.json"));
    CHECK(info["threads"] == 1);
    CHECK(info["tool"] == "combsim");
    CHECK(info["seeds"] == nlohmann::json::array({1, 2}));
}

TEST_CASE("The output directory comes from the environment when --out is absent") {
    const auto cfg = write_config("env", small_run("env"));
    const auto d = scratch("env_out");
    REQUIRE(run("run " + cfg.string() + " --seed 3", "COMBSIM_OUT_DIR=" + d.string()).code == 0);
    CHECK(fs::exists(d / "channels.csv"));
}

TEST_CASE("sweep covers every mode, channel and skip") {
    auto j = small_run("sw");
    j["seeds"] = {1};
    j["sweep"] = {{"skip_blocks", {0, 1, 10}}};
    const auto d = scratch("sweep_out");
    REQUIRE(run("sweep " + write_config("sw", j).string() + " --out " + d.string()).code == 0);
    CHECK(rows(d / "sweep.csv") == 3 * 2 * 3);
    CHECK_FALSE(fs::exists(d / "channels.csv"));
}

TEST_CASE("report summarizes a run directory") {
    const auto cfg = write_config("rep", small_run("rep"));
    const auto d = scratch("rep_out");
    REQUIRE(run("run " + cfg.string() + " --out " + d.string()).code == 0);
    const auto r = run("report " + d.string());
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["run"]["scenario"] == "rep");
    CHECK(j["files"]["channels.csv"] == 4);
    CHECK(j["channels"]["LockedCombs"]["rows"] == 4);
    const auto missing = run("report " + scratch("empty").string());
    CHECK(missing.code == 2);
}

TEST_CASE("Every preset validates through the CLI") {
    for (const auto& e : fs::directory_iterator(PRESET_DIR)) {
        INFO(e.path().string());
        CHECK(run("validate " + e.path().string()).code == 0);
        CHECK(run("validate " + e.path().string() + " --full").code == 0);
    }
}
