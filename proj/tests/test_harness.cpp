#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kergap/errors.hpp"
#include "kergap/harness.hpp"

using namespace kergap;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("kergap_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.env.kind = EnvKind::synthetic_sine;
    cfg.env.arms = 3;
    cfg.env.seed = 4;
    cfg.policies = {PolicyKind::contextual_gap, PolicyKind::uniform};
    cfg.budgets = {12, 24};
    cfg.replications = 2;
    cfg.eval_size = 20;
    cfg.seed = 9;
    return cfg;
}

std::vector<std::string> lines_of(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

// Drops the trailing (timing) field so runs can be compared for determinism.
std::string without_seconds(const std::string& line) {
    return line.substr(0, line.rfind(','));
}

EnvStep step_with_means(double x, double m0, double m1) {
    EnvStep step;
    step.context = Vector::Constant(1, x);
    step.means = Vector(2);
    step.means << m0, m1;
    step.realized = step.means;
    step.has_means = true;
    return step;
}

}  // namespace

TEST_CASE("uniform exploration spreads pulls evenly") {
    ExperimentConfig cfg = tiny_config();
    Environment env(cfg.env);
    const PolicyConfig pc = cfg.policy_config_for(PolicyKind::uniform, 1);
    const BanditState state = run_exploration(PolicyKind::uniform, pc, env, 9);
    REQUIRE(state.pull_counts.size() == 3);
    for (int a = 0; a < 3; ++a) CHECK(state.pull_counts[a] == 3);
    CHECK(state.t == 9);
}

TEST_CASE("every policy owes each arm its burn-in pulls") {
    ExperimentConfig cfg = tiny_config();
    cfg.burn_in = 2;
    for (PolicyKind kind : all_policy_kinds()) {
        Environment env(cfg.env);
        const PolicyConfig pc = cfg.policy_config_for(kind, 2);
        const BanditState state = run_exploration(kind, pc, env, 7);
        std::int64_t total = 0;
        for (int a = 0; a < 3; ++a) {
            CHECK(state.pull_counts[a] >= 2);
            total += state.pull_counts[a];
        }
        CHECK(total == 7);
    }
    Environment env(cfg.env);
    const PolicyConfig pc = cfg.policy_config_for(PolicyKind::uniform, 2);
    CHECK_THROWS_AS(run_exploration(PolicyKind::uniform, pc, env, 6), std::invalid_argument);
}

TEST_CASE("evaluation scores the recommendation against the best mean") {
    // Arm 0 is better by 0.5 everywhere, so any trained state recommends it.
    ExperimentConfig cfg = tiny_config();
    cfg.env.arms = 2;
    cfg.env.frequencies = {0.0, 0.0};
    cfg.env.offsets = {0.5, 0.0};
    Environment env(cfg.env);
    const PolicyConfig pc = cfg.policy_config_for(PolicyKind::contextual_gap, 3);
    const BanditState state = run_exploration(PolicyKind::contextual_gap, pc, env, 20);

    std::vector<EnvStep> aligned{step_with_means(0.3, 0.5, 0.0), step_with_means(1.1, 0.5, 0.0)};
    const auto [avg_ok, worst_ok] = evaluate(PolicyKind::contextual_gap, state, aligned, pc);
    CHECK(avg_ok == doctest::Approx(0.0));
    CHECK(worst_ok == doctest::Approx(0.0));

    // On contexts where the other arm is secretly better, the same state pays.
    std::vector<EnvStep> misled{step_with_means(0.3, 0.0, 0.5), step_with_means(1.1, 0.0, 0.5)};
    const auto [avg_bad, worst_bad] = evaluate(PolicyKind::contextual_gap, state, misled, pc);
    CHECK(avg_bad == doctest::Approx(0.5));
    CHECK(worst_bad == doctest::Approx(0.5));

    std::vector<EnvStep> mixed{step_with_means(0.3, 0.5, 0.0), step_with_means(1.1, 0.0, 0.5)};
    const auto [avg_mix, worst_mix] = evaluate(PolicyKind::contextual_gap, state, mixed, pc);
    CHECK(avg_mix == doctest::Approx(0.25));
    CHECK(worst_mix == doctest::Approx(0.5));
    CHECK(avg_mix <= worst_mix);

    CHECK_THROWS_AS(evaluate(PolicyKind::contextual_gap, state, {}, pc), std::invalid_argument);
}

TEST_CASE("sweeps cover every cell and conserve the budget") {
    ExperimentConfig cfg = tiny_config();
    const std::vector<RegretReport> reports = budget_sweep(cfg, 1, true);
    REQUIRE(reports.size() == 2 * 2 * 2);
    for (const RegretReport& r : reports) {
        CHECK_FALSE(r.failed);
        CHECK(r.avg_regret >= 0.0);
        CHECK(r.avg_regret <= r.worst_regret + 1e-12);
        CHECK(r.seconds >= 0.0);
        std::int64_t total = 0;
        for (std::int64_t p : r.pulls) total += p;
        CHECK(total == r.budget);
    }
    // Same seeds, fresh run, more workers: identical results modulo timing.
    const std::vector<RegretReport> again = budget_sweep(cfg, 2, true);
    REQUIRE(again.size() == reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        CHECK(again[i].policy == reports[i].policy);
        CHECK(again[i].budget == reports[i].budget);
        CHECK(again[i].replication == reports[i].replication);
        CHECK(again[i].avg_regret == reports[i].avg_regret);
        CHECK(again[i].worst_regret == reports[i].worst_regret);
        CHECK(again[i].pulls == reports[i].pulls);
    }
}

TEST_CASE("width-driven twins explore identically") {
    ExperimentConfig cfg = tiny_config();
    cfg.policies = {PolicyKind::kernel_ucb, PolicyKind::kernel_ucb_mod};
    for (std::int64_t budget : cfg.budgets)
        for (int rep = 0; rep < cfg.replications; ++rep) {
            const RegretReport a = run_cell(cfg, PolicyKind::kernel_ucb, budget, rep);
            const RegretReport b = run_cell(cfg, PolicyKind::kernel_ucb_mod, budget, rep);
            CHECK(a.pulls == b.pulls);  // they differ only in the exploitation rule
        }
}

TEST_CASE("report files round trip and flag failed cells") {
    ExperimentConfig cfg = tiny_config();
    std::vector<RegretReport> reports = budget_sweep(cfg, 1, true);
    reports[1].avg_regret = std::numeric_limits<double>::quiet_NaN();
    reports[1].worst_regret = std::numeric_limits<double>::quiet_NaN();
    reports[1].failed = true;
    TempFile csv("reports.csv");
    TempFile hist("reports_hist.csv");
    write_reports(csv.path, reports);
    const std::vector<RegretReport> back = read_reports(csv.path);
    REQUIRE(back.size() == reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        CHECK(back[i].policy == reports[i].policy);
        CHECK(back[i].budget == reports[i].budget);
        CHECK(back[i].replication == reports[i].replication);
        CHECK(back[i].failed == reports[i].failed);
        if (!reports[i].failed) {
            CHECK(back[i].avg_regret == reports[i].avg_regret);
            CHECK(back[i].worst_regret == reports[i].worst_regret);
        }
    }
    // The pull histogram sibling uses 1-based arm ids and conserves budgets.
    const std::vector<std::string> hist_lines = lines_of(hist.path);
    REQUIRE(hist_lines.size() == 1 + reports.size() * 3);
    CHECK(hist_lines[0] == "policy,budget,replication,arm,pulls");
    std::int64_t first_total = 0;
    for (int a = 0; a < 3; ++a) {
        std::istringstream row(hist_lines[1 + a]);
        std::string policy, budget, rep, arm, pulls;
        std::getline(row, policy, ',');
        std::getline(row, budget, ',');
        std::getline(row, rep, ',');
        std::getline(row, arm, ',');
        std::getline(row, pulls, ',');
        CHECK(arm == std::to_string(a + 1));
        first_total += std::stoll(pulls);
    }
    CHECK(first_total == reports[0].budget);
}

TEST_CASE("rerunning a sweep reproduces the file except for timings") {
    ExperimentConfig cfg = tiny_config();
    TempFile csv_a("run_a.csv"), hist_a("run_a_hist.csv");
    TempFile csv_b("run_b.csv"), hist_b("run_b_hist.csv");
    write_reports(csv_a.path, budget_sweep(cfg, 1, true));
    write_reports(csv_b.path, budget_sweep(cfg, 1, true));
    const auto a = lines_of(csv_a.path), b = lines_of(csv_b.path);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(without_seconds(a[i]) == without_seconds(b[i]));
    const auto ha = lines_of(hist_a.path), hb = lines_of(hist_b.path);
    CHECK(ha == hb);
}

TEST_CASE("csv sweeps reserve the tail rows for evaluation") {
    ExperimentConfig cfg = tiny_config();
    cfg.policies = {PolicyKind::uniform};
    cfg.budgets = {12};
    cfg.replications = 2;
    cfg.eval_size = 10;
    Environment source(cfg.env);
    std::vector<EnvStep> steps;
    for (int i = 0; i < 22; ++i) steps.push_back(source.next());
    TempFile data("sweep_data.csv");
    Environment::save_csv(data.path, steps, 1, 3, true);
    cfg.env.kind = EnvKind::csv;
    cfg.env.path = data.path;
    const std::vector<RegretReport> reports = budget_sweep(cfg, 1, true);
    REQUIRE(reports.size() == 2);
    for (const RegretReport& r : reports) CHECK_FALSE(r.failed);
    CHECK(run_cell(cfg, PolicyKind::uniform, 12, 0).avg_regret == reports[0].avg_regret);

    // Too few rows for budget + eval is a recorded failure, not a crash.
    cfg.eval_size = 11;
    const std::vector<RegretReport> starved = budget_sweep(cfg, 1, true);
    REQUIRE(starved.size() == 2);
    for (const RegretReport& r : starved) {
        CHECK(r.failed);
        CHECK(std::isnan(r.avg_regret));
    }
}

TEST_CASE("holdout tuning returns the planted grid point") {
    ExperimentConfig cfg;
    cfg.env.kind = EnvKind::synthetic_sine;
    cfg.env.arms = 2;
    cfg.env.frequencies = {1.0, 2.0};
    cfg.env.offsets = {0.0, 0.0};
    cfg.policies = {PolicyKind::contextual_gap, PolicyKind::uniform};
    cfg.budgets = {60};
    cfg.replications = 1;
    cfg.eval_size = 10;
    cfg.seed = 21;
    cfg.tune_budget = 60;
    cfg.tune_eval_size = 60;
    // A kernel this wide cannot track arms that cross, so tuning must reject it.
    cfg.grid.bandwidths = {1e6, 1.0};
    cfg.grid.lambdas = {1.0};
    cfg.grid.alphas = {1.0};
    const auto best = grid_search(cfg, 1, true);
    REQUIRE(best.count(PolicyKind::contextual_gap) == 1);
    REQUIRE(best.count(PolicyKind::uniform) == 1);
    CHECK(best.at(PolicyKind::contextual_gap).bandwidth == doctest::Approx(1.0));
    CHECK(best.at(PolicyKind::uniform).bandwidth == doctest::Approx(1.0));

    // The winning point plugs back in through the override table.
    ExperimentConfig tuned = cfg;
    tuned.overrides[PolicyKind::contextual_gap] = best.at(PolicyKind::contextual_gap);
    const PolicyConfig pc = tuned.policy_config_for(PolicyKind::contextual_gap, 0);
    CHECK(pc.kernel.bandwidth == doctest::Approx(1.0));

    // Singleton grids have nothing to choose between.
    ExperimentConfig single = cfg;
    single.grid.bandwidths = {0.7};
    const auto only = grid_search(single, 1, true);
    CHECK(only.at(PolicyKind::contextual_gap).bandwidth == doctest::Approx(0.7));
    CHECK(only.at(PolicyKind::contextual_gap).lambda == doctest::Approx(1.0));
}

TEST_CASE("exploration budget size requirement reflects arms and burn-in") {
    const BetaInputs base{1000, 0.5, 1.0, 3, 1, 100.0, 1.0, 0.0};
    const BetaResult r = compute_beta(base);
    CHECK(r.beta == doctest::Approx(std::sqrt(505.0 / 1600.0)).epsilon(1e-12));
    CHECK(r.positive);

    BetaInputs offset = base;
    offset.c2 = 0.5;
    const BetaResult at_edge = compute_beta(offset);
    CHECK(at_edge.min_budget == doctest::Approx(790.0).epsilon(1e-12));
    BetaInputs edge = offset;
    edge.budget = 790;
    CHECK(compute_beta(edge).beta == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK_FALSE(compute_beta(edge).positive);
    edge.budget = 791;
    CHECK(compute_beta(edge).positive);
    edge.budget = 789;
    CHECK(compute_beta(edge).beta < 0.0);

    BetaInputs longer = base;
    longer.budget = 2000;
    CHECK(compute_beta(longer).beta > r.beta);

    BetaInputs bad = base;
    bad.hardness_sum = 0.0;
    CHECK_THROWS_AS(compute_beta(bad), std::invalid_argument);
    bad = base;
    bad.c1 = 0.0;
    CHECK_THROWS_AS(compute_beta(bad), std::invalid_argument);
}

TEST_CASE("width budget curve starts at the prior and shrinks monotonically") {
    const double alpha = 1.3, lambda = 0.7, lambda_x = 0.5;
    CHECK(g_bound(0, alpha, lambda, lambda_x) ==
          doctest::Approx(8.0 * alpha * alpha / lambda).epsilon(1e-12));
    double prev = g_bound(0, alpha, lambda, lambda_x);
    for (std::int64_t n = 1; n <= 50; ++n) {
        const double cur = g_bound(n, alpha, lambda, lambda_x);
        CHECK(cur < prev);
        prev = cur;
    }
    for (std::int64_t n : {std::int64_t{0}, std::int64_t{1}, std::int64_t{7}, std::int64_t{100},
                           std::int64_t{5000}}) {
        const double width = std::sqrt(g_bound(n, alpha, lambda, lambda_x));
        const double back = g_inverse(width, alpha, lambda, lambda_x);
        CHECK(back == doctest::Approx(static_cast<double>(n)).scale(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(g_bound(-1, alpha, lambda, lambda_x), std::invalid_argument);
    CHECK_THROWS_AS(g_inverse(0.0, alpha, lambda, lambda_x), std::invalid_argument);
}

TEST_CASE("config text round trips exactly") {
    ExperimentConfig cfg = tiny_config();
    cfg.env.frequencies = {1.0, 2.0, 3.0};
    cfg.env.offsets = {0.1, 0.0, -0.2};
    cfg.overrides[PolicyKind::kernel_ts].ts_scale = 0.5;
    cfg.overrides[PolicyKind::epsilon_greedy].epsilon_decay = 0.9;
    cfg.overrides[PolicyKind::contextual_gap].alpha = 2.0;
    const std::string text = cfg.to_text();
    const ExperimentConfig back = ExperimentConfig::from_string(text);
    CHECK(back.to_text() == text);
    CHECK(back.env.arms == 3);
    CHECK(back.overrides.at(PolicyKind::kernel_ts).ts_scale.value() == doctest::Approx(0.5));
    CHECK_FALSE(back.overrides.at(PolicyKind::kernel_ts).bandwidth.has_value());
}

TEST_CASE("config text reports bad lines by number") {
    const std::string bad_key = "env.arms = 3\nwibble = 1\n";
    try {
        ExperimentConfig::from_string(bad_key);
        FAIL("expected parse error");
    } catch (const parse_error& e) {
        CHECK(e.line_number == 2);
    }
    CHECK_THROWS_AS(ExperimentConfig::from_string("env.arms 3\n"), parse_error);
    // Comments and blank lines are ignored.
    const ExperimentConfig ok =
        ExperimentConfig::from_string("# header\n\nenv.arms = 5 # five arms\n");
    CHECK(ok.env.arms == 5);
    ExperimentConfig cfg;
    CHECK_THROWS_AS(cfg.apply_override("nope=1"), std::invalid_argument);
    cfg.apply_override("policy.kernel_ts.ts_scale=0.25");
    CHECK(cfg.overrides.at(PolicyKind::kernel_ts).ts_scale.value() == doctest::Approx(0.25));
}

TEST_CASE("experiment validation rejects inconsistent settings") {
    ExperimentConfig cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());
    ExperimentConfig low = cfg;
    low.budgets = {3};  // not past arms * burn_in
    CHECK_THROWS_AS(low.validate(), std::invalid_argument);
    ExperimentConfig order = cfg;
    order.budgets = {24, 12};
    CHECK_THROWS_AS(order.validate(), std::invalid_argument);
    ExperimentConfig dup = cfg;
    dup.policies = {PolicyKind::uniform, PolicyKind::uniform};
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
    ExperimentConfig eps = cfg;
    eps.grid.epsilon_decays = {1.0};
    CHECK_THROWS_AS(eps.validate(), std::invalid_argument);
    ExperimentConfig empty = cfg;
    empty.policies.clear();
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("histogram paths sit next to the report") {
    CHECK(hist_path_for("results.csv") == "results_hist.csv");
    CHECK(hist_path_for("out/run.csv") == "out/run_hist.csv");
    CHECK(hist_path_for("plain") == "plain_hist.csv");
}
