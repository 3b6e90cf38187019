#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kergap/environments.hpp"
#include "kergap/harness.hpp"

using namespace kergap;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const std::string capture = "kergap_cli_capture.txt";
    const std::string cmd = std::string(KERGAP_CLI_PATH) + " " + args + " >" + capture + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) *output = slurp(capture);
    std::remove(capture.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSweepConfig =
    "env.kind = synthetic_sine\n"
    "env.arms = 3\n"
    "policies = contextual_gap,uniform\n"
    "budgets = 12,24\n"
    "replications = 2\n"
    "eval_size = 15\n"
    "seed = 11\n"
    "output = kergap_cli_out.csv\n";

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(static_cast<bool>(out));
    out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("version flag reports the tool and schema version") {
    std::string out;
    CHECK(run_cli("--version", &out) == 0);
    CHECK(out.find("kergap 0.1.0") != std::string::npos);
    CHECK(out.find("config schema v1") != std::string::npos);
}

TEST_CASE("unknown verbs and missing options fail the parse") {
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("sweep") == 1);           // --config is required
    CHECK(run_cli("") == 1);                // no subcommand prints help
    CHECK(run_cli("gen-data --config nope.cfg --rows 3") == 1);  // --out required
}

TEST_CASE("sweep writes reports, histogram and metadata") {
    TempFile cfg("kergap_cli_sweep.cfg");
    TempFile out("kergap_cli_out.csv");
    TempFile hist("kergap_cli_out_hist.csv");
    TempFile meta("kergap_cli_out_meta.json");
    write_file(cfg.path, kSweepConfig);
    const std::string before = slurp(cfg.path);

    std::string log;
    CHECK(run_cli("--quiet --jobs 1 sweep --config " + cfg.path, &log) == 0);
    CHECK(log.find("8 cells") != std::string::npos);
    CHECK(slurp(cfg.path) == before);  // the config file itself is never touched

    const auto rows = lines_of(slurp(out.path));
    REQUIRE(rows.size() == 9);
    CHECK(rows[0] == "policy,budget,replication,avg_regret,worst_regret,seconds");
    const auto reports = read_reports(out.path);
    REQUIRE(reports.size() == 8);
    for (const auto& r : reports) CHECK_FALSE(r.failed);

    const nlohmann::json j = nlohmann::json::parse(slurp(meta.path));
    CHECK(j.at("seed") == 11);
    CHECK(j.at("config_schema") == 1);
    const ExperimentConfig echoed = ExperimentConfig::from_string(j.at("config").get<std::string>());
    CHECK(echoed.env.arms == 3);

    CHECK(lines_of(slurp(hist.path)).size() == 1 + 8 * 3);
}

TEST_CASE("set overrides reshape the run without editing the config") {
    TempFile cfg("kergap_cli_set.cfg");
    TempFile out("kergap_cli_out.csv");
    TempFile hist("kergap_cli_out_hist.csv");
    TempFile meta("kergap_cli_out_meta.json");
    write_file(cfg.path, kSweepConfig);
    CHECK(run_cli("--quiet --jobs 1 sweep --config " + cfg.path +
                  " --set budgets=12 --set replications=1") == 0);
    CHECK(read_reports(out.path).size() == 2);  // two policies, one budget, one rep
    // A bad key is a config error, not a crash.
    std::string log;
    CHECK(run_cli("--quiet sweep --config " + cfg.path + " --set wibble=1", &log) == 1);
    CHECK(log.find("config error") != std::string::npos);
    // So is an inconsistent value.
    CHECK(run_cli("--quiet sweep --config " + cfg.path + " --set budgets=2") == 1);
}

TEST_CASE("replay reproduces a recorded cell bit for bit") {
    TempFile cfg("kergap_cli_replay.cfg");
    TempFile out("kergap_cli_out.csv");
    TempFile hist("kergap_cli_out_hist.csv");
    TempFile meta("kergap_cli_out_meta.json");
    write_file(cfg.path, kSweepConfig);
    REQUIRE(run_cli("--quiet --jobs 1 sweep --config " + cfg.path) == 0);

    std::string log;
    CHECK(run_cli("--quiet replay --config " + cfg.path +
                      " --policy uniform --budget 12 --replication 0",
                  &log) == 0);
    CHECK(log.find("matches") != std::string::npos);

    // Tampering with the recorded row is detected.
    TempFile tampered("kergap_cli_tampered.csv");
    std::ostringstream rewritten;
    for (const std::string& line : lines_of(slurp(out.path))) {
        if (line.rfind("uniform,12,0,", 0) == 0)
            rewritten << "uniform,12,0,0.987,0.99,0\n";
        else
            rewritten << line << "\n";
    }
    write_file(tampered.path, rewritten.str());
    CHECK(run_cli("--quiet replay --config " + cfg.path +
                      " --policy uniform --budget 12 --replication 0 --results " + tampered.path,
                  &log) == 2);
    CHECK(log.find("mismatch") != std::string::npos);

    // A cell that was never recorded cannot be verified either.
    CHECK(run_cli("--quiet replay --config " + cfg.path +
                  " --policy uniform --budget 13 --replication 0") == 2);
}

TEST_CASE("tuning emits parameters the config parser accepts") {
    TempFile cfg("kergap_cli_tune.cfg");
    TempFile out("kergap_cli_params.cfg");
    write_file(cfg.path,
               "env.kind = synthetic_sine\n"
               "env.arms = 2\n"
               "policies = kernel_ts\n"
               "budgets = 40\n"
               "replications = 1\n"
               "eval_size = 10\n"
               "tune.budget = 40\n"
               "tune.eval_size = 20\n"
               "grid.ts_scales = 0.5,1\n");
    CHECK(run_cli("--quiet --jobs 1 tune --config " + cfg.path + " --out " + out.path) == 0);
    const std::string params = slurp(out.path);
    CHECK(params.find("policy.kernel_ts.ts_scale = ") != std::string::npos);
    CHECK(params.find("policy.kernel_ts.bandwidth = ") != std::string::npos);
    const ExperimentConfig merged =
        ExperimentConfig::from_string(std::string(kSweepConfig) + params);
    CHECK(merged.overrides.count(PolicyKind::kernel_ts) == 1);
}

TEST_CASE("diagnostics write machine-readable verdicts") {
    TempFile report("kergap_cli_diag.json");
    std::string log;
    CHECK(run_cli("--jobs 1 diagnose eigen --trials 50 --out " + report.path, &log) == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(report.path));
    CHECK(j.at("name") == "eigen_lower_bound");
    CHECK(j.at("trials") == 50);
    CHECK(j.at("pass").is_boolean());
    CHECK(log.find("eigen_lower_bound") != std::string::npos);

    CHECK(run_cli("diagnose nonsense --out " + report.path, &log) == 1);
    CHECK(log.find("unknown diagnostic") != std::string::npos);

    TempFile cov("coverage_kergap_cli_all.json");
    TempFile eig("eigen_lower_bound_kergap_cli_all.json");
    TempFile wid("width_bound_kergap_cli_all.json");
    CHECK(run_cli("--jobs 1 diagnose all --trials 25 --out kergap_cli_all.json") == 0);
    CHECK(nlohmann::json::parse(slurp(cov.path)).at("name") == "coverage");
    CHECK(nlohmann::json::parse(slurp(eig.path)).at("trials") == 25);
    CHECK(nlohmann::json::parse(slurp(wid.path)).at("name") == "width_bound");
}

TEST_CASE("generated datasets load back as csv environments") {
    TempFile cfg("kergap_cli_gen.cfg");
    TempFile data("kergap_cli_data.csv");
    write_file(cfg.path, kSweepConfig);
    CHECK(run_cli("--seed 3 gen-data --config " + cfg.path + " --rows 30 --out " + data.path) ==
          0);
    Environment env = Environment::from_csv(data.path);
    CHECK(env.rows() == 30);
    CHECK(env.arms() == 3);
    CHECK(env.next().has_means);

    CHECK(run_cli("--seed 3 gen-data --config " + cfg.path + " --rows 5 --out " + data.path +
                  " --no-means") == 0);
    Environment blind = Environment::from_csv(data.path);
    CHECK(blind.rows() == 5);
    CHECK_FALSE(blind.next().has_means);
}

TEST_CASE("sweeps with unsatisfiable cells report partial failure") {
    TempFile cfg("kergap_cli_starved.cfg");
    TempFile data("kergap_cli_short.csv");
    TempFile out("kergap_cli_out.csv");
    TempFile hist("kergap_cli_out_hist.csv");
    TempFile meta("kergap_cli_out_meta.json");
    write_file(cfg.path, kSweepConfig);
    REQUIRE(run_cli("--seed 3 gen-data --config " + cfg.path + " --rows 20 --out " + data.path) ==
            0);
    // 20 rows cannot host a 24-step exploration plus 15 evaluation rows.
    std::string log;
    CHECK(run_cli("--quiet --jobs 1 sweep --config " + cfg.path + " --set env.kind=csv --set env.path=" +
                      data.path,
                  &log) == 2);
    const auto reports = read_reports(out.path);
    REQUIRE(reports.size() == 8);
    for (const auto& r : reports) CHECK(r.failed);
}
