#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kergap/diagnostics.hpp"
#include "kergap/errors.hpp"
#include "kergap/format.hpp"
#include "kergap/harness.hpp"
#include "kergap/version.hpp"

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    int jobs = std::max(1u, std::thread::hardware_concurrency());
    bool quiet = false;
};

kergap::ExperimentConfig load_config(const Common& common) {
    kergap::ExperimentConfig cfg = kergap::ExperimentConfig::from_file(common.config_path);
    for (const std::string& s : common.sets) cfg.apply_override(s);
    if (common.seed) cfg.seed = *common.seed;
    cfg.validate();
    return cfg;
}

std::string meta_path_for(const std::string& csv_path) {
    const auto dot = csv_path.rfind('.');
    if (dot == std::string::npos || csv_path.find('/', dot) != std::string::npos)
        return csv_path + "_meta.json";
    return csv_path.substr(0, dot) + "_meta.json";
}

void write_meta(const kergap::ExperimentConfig& cfg, const std::string& csv_path) {
    nlohmann::json j;
    j["version"] = kergap::kVersion;
    j["config_schema"] = kergap::kConfigSchemaVersion;
    j["seed"] = cfg.seed;
    j["config"] = cfg.to_text();
    std::ofstream out(meta_path_for(csv_path));
    if (!out) throw std::invalid_argument("cannot write " + meta_path_for(csv_path));
    out << j.dump(2) << "\n";
}

int run_sweep(const Common& common) {
    const kergap::ExperimentConfig cfg = load_config(common);
    const auto reports = kergap::budget_sweep(cfg, common.jobs, common.quiet);
    kergap::write_reports(cfg.output, reports);
    write_meta(cfg, cfg.output);
    std::size_t failed = 0;
    for (const auto& r : reports) failed += r.failed ? 1 : 0;
    std::cout << "wrote " << cfg.output << " (" << reports.size() << " cells, " << failed
              << " failed)\n";
    return failed == 0 ? 0 : 2;
}

int run_tune(const Common& common, const std::string& out_path) {
    const kergap::ExperimentConfig cfg = load_config(common);
    const auto best = kergap::grid_search(cfg, common.jobs, common.quiet);
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot write " + out_path);
    for (const auto& [kind, p] : best) {
        const std::string prefix = "policy." + kergap::to_string(kind) + ".";
        if (p.bandwidth) out << prefix << "bandwidth = " << kergap::format_double(*p.bandwidth) << "\n";
        if (p.lambda) out << prefix << "lambda = " << kergap::format_double(*p.lambda) << "\n";
        if (p.alpha) out << prefix << "alpha = " << kergap::format_double(*p.alpha) << "\n";
        if (p.epsilon_decay)
            out << prefix << "epsilon_decay = " << kergap::format_double(*p.epsilon_decay) << "\n";
        if (p.ts_scale) out << prefix << "ts_scale = " << kergap::format_double(*p.ts_scale) << "\n";
    }
    std::cout << "wrote " << out_path << " (" << best.size() << " policies)\n";
    return 0;
}

int run_replay(const Common& common, const std::string& policy, std::int64_t budget,
               int replication, const std::string& results) {
    const kergap::ExperimentConfig cfg = load_config(common);
    const kergap::PolicyKind kind = kergap::policy_kind_from_string(policy);
    const kergap::RegretReport fresh = kergap::run_cell(cfg, kind, budget, replication);
    std::cout << "avg_regret=" << kergap::format_double(fresh.avg_regret)
              << " worst_regret=" << kergap::format_double(fresh.worst_regret) << "\n";
    const std::string path = results.empty() ? cfg.output : results;
    if (std::ifstream(path).good()) {
        for (const auto& r : kergap::read_reports(path)) {
            if (r.policy != kind || r.budget != budget || r.replication != replication) continue;
            if (r.avg_regret == fresh.avg_regret && r.worst_regret == fresh.worst_regret) {
                std::cout << "matches " << path << "\n";
                return 0;
            }
            std::cerr << "mismatch against " << path << ": recorded avg "
                      << kergap::format_double(r.avg_regret) << ", worst "
                      << kergap::format_double(r.worst_regret) << "\n";
            return 2;
        }
        std::cerr << "no matching cell in " << path << "\n";
        return 2;
    }
    return 0;
}

int run_gen_data(const Common& common, std::int64_t rows, const std::string& out_path,
                 bool with_means) {
    kergap::ExperimentConfig cfg = kergap::ExperimentConfig::from_file(common.config_path);
    for (const std::string& s : common.sets) cfg.apply_override(s);
    if (common.seed) cfg.seed = *common.seed;
    cfg.env.validate();
    kergap::EnvSpec spec = cfg.env;
    spec.seed = cfg.seed;
    kergap::Environment env(spec);
    std::vector<kergap::EnvStep> steps;
    steps.reserve(rows);
    for (std::int64_t i = 0; i < rows; ++i) steps.push_back(env.next());
    kergap::Environment::save_csv(out_path, steps, env.dims(), env.arms(), with_means);
    std::cout << "wrote " << out_path << " (" << rows << " rows)\n";
    return 0;
}

struct DiagnoseArgs {
    std::string name;
    std::string out_path;
    std::int64_t trials = 0;  // 0 keeps each check's default
    double beta = 2.0;
    double delta = 0.0;       // 0 keeps the default
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int run_diagnose(const Common& common, const DiagnoseArgs& args) {
    std::vector<kergap::DiagnosticReport> reports;
    auto want = [&](const std::string& n) { return args.name == "all" || args.name == n; };
    if (want("coverage")) {
        kergap::CoverageOptions opts;
        opts.beta = args.beta;
        if (args.trials > 0) opts.trials = args.trials;
        if (args.seed_set) opts.seed = args.seed;
        opts.jobs = common.jobs;
        reports.push_back(kergap::coverage_check(opts));
    }
    if (want("eigen")) {
        kergap::EigenBoundOptions opts;
        if (args.trials > 0) opts.trials = args.trials;
        if (args.delta > 0.0) opts.delta = args.delta;
        if (args.seed_set) opts.seed = args.seed;
        opts.jobs = common.jobs;
        reports.push_back(kergap::eigen_lower_bound_check(opts));
    }
    if (want("width")) {
        kergap::WidthBoundOptions opts;
        if (args.trials > 0) opts.runs = args.trials;
        if (args.delta > 0.0) opts.delta = args.delta;
        if (args.seed_set) opts.seed = args.seed;
        opts.jobs = common.jobs;
        reports.push_back(kergap::width_bound_check(opts));
    }
    if (reports.empty())
        throw std::invalid_argument("unknown diagnostic: " + args.name +
                                    " (expected coverage, eigen, width or all)");
    for (const auto& r : reports) {
        const std::string path =
            reports.size() == 1 ? args.out_path : r.name + "_" + args.out_path;
        r.write(path);
        std::cout << r.name << ": violation_rate=" << kergap::format_double(r.violation_rate)
                  << " nominal=" << kergap::format_double(r.nominal_rate)
                  << (r.pass ? " pass" : " fail") << " -> " << path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel contextual bandits: gap-based exploration harness"};
    app.require_subcommand(0, 1);
    Common common;
    bool show_version = false;
    app.add_flag("--version", show_version, "print version and exit");
    app.add_option("--jobs", common.jobs, "worker threads for sweeps and diagnostics");
    app.add_flag("--quiet", common.quiet, "suppress progress logging");
    app.add_option("--seed", common.seed, "override the configured base seed");

    auto add_config = [&](CLI::App* sub, bool required = true) {
        auto* opt = sub->add_option("--config", common.config_path, "experiment config file");
        if (required) opt->required();
        sub->add_option("--set", common.sets, "override a config key, key=value");
    };

    CLI::App* sweep = app.add_subcommand("sweep", "run the budget sweep and write regret reports");
    add_config(sweep);

    CLI::App* tune = app.add_subcommand("tune", "grid-search parameters on a holdout stream");
    add_config(tune);
    std::string tune_out = "tuned_params.cfg";
    tune->add_option("--out", tune_out, "where to write the chosen parameters");

    CLI::App* diagnose = app.add_subcommand("diagnose", "run a named diagnostic suite");
    DiagnoseArgs dargs;
    diagnose->add_option("name", dargs.name, "coverage, eigen, width or all")->required();
    diagnose->add_option("--out", dargs.out_path, "report path")->default_val("report.json");
    diagnose->add_option("--trials", dargs.trials, "trial count (0 = default)");
    diagnose->add_option("--beta", dargs.beta, "coverage confidence parameter");
    diagnose->add_option("--delta", dargs.delta, "failure budget for spectral checks");
    auto* dseed = diagnose->add_option("--seed", dargs.seed, "diagnostic seed");
    diagnose->add_option("--jobs", common.jobs, "worker threads");
    diagnose->add_flag("--quiet", common.quiet, "suppress progress logging");

    CLI::App* replay = app.add_subcommand("replay", "re-run one sweep cell and verify its row");
    add_config(replay);
    std::string replay_policy;
    std::int64_t replay_budget = 0;
    int replay_rep = 0;
    std::string replay_results;
    replay->add_option("--policy", replay_policy, "policy kind")->required();
    replay->add_option("--budget", replay_budget, "exploration budget")->required();
    replay->add_option("--replication", replay_rep, "replication index")->required();
    replay->add_option("--results", replay_results, "results csv to compare against");

    CLI::App* gen = app.add_subcommand("gen-data", "sample an environment into a csv file");
    add_config(gen);
    std::int64_t gen_rows = 0;
    std::string gen_out;
    bool gen_means = true;
    gen->add_option("--rows", gen_rows, "rows to generate")->required();
    gen->add_option("--out", gen_out, "output csv path")->required();
    gen->add_flag("--means,!--no-means", gen_means, "include true means (default on)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (show_version) {
        std::cout << "kergap " << kergap::kVersion << " (config schema v"
                  << kergap::kConfigSchemaVersion << ")\n";
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }
    dargs.seed_set = dseed->count() > 0;

    try {
        if (sweep->parsed()) return run_sweep(common);
        if (tune->parsed()) return run_tune(common, tune_out);
        if (diagnose->parsed()) return run_diagnose(common, dargs);
        if (replay->parsed())
            return run_replay(common, replay_policy, replay_budget, replay_rep, replay_results);
        if (gen->parsed()) return run_gen_data(common, gen_rows, gen_out, gen_means);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const kergap::parse_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const kergap::schema_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
