#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kergap/environments.hpp"
#include "kergap/policies.hpp"

namespace kergap {

// Per-policy tunables; anything unset falls back to the experiment-wide value.
struct PolicyParams {
    std::optional<double> bandwidth;
    std::optional<double> lambda;
    std::optional<double> alpha;
    std::optional<double> epsilon_decay;
    std::optional<double> ts_scale;
};

struct GridSpec {
    std::vector<double> bandwidths{1.0};
    std::vector<double> lambdas{1.0};
    std::vector<double> alphas{1.0};
    std::vector<double> epsilon_decays{0.99};
    std::vector<double> ts_scales{1.0};
};

struct ExperimentConfig {
    EnvSpec env{};
    std::vector<PolicyKind> policies{all_policy_kinds()};
    std::vector<std::int64_t> budgets{100, 200, 500, 1000, 2000};
    int replications = 20;
    int eval_size = 500;
    std::uint64_t seed = 1;
    std::string output = "results.csv";

    KernelFamily kernel_family = KernelFamily::gaussian;
    double bandwidth = 1.0;
    double lambda = 1.0;
    double alpha = 1.0;
    int burn_in = 1;
    int history_window = 1;
    double epsilon_decay = 0.99;
    double ts_scale = 1.0;
    std::map<PolicyKind, PolicyParams> overrides;

    GridSpec grid{};
    std::int64_t tune_budget = 500;
    int tune_eval_size = 200;

    void validate() const;  // throws invalid_argument; budgets strictly increasing etc.
    PolicyConfig policy_config_for(PolicyKind kind, std::uint64_t run_seed = 0) const;

    // key = value text, # comments; unknown keys are errors.
    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text);
    void apply_override(const std::string& assignment);  // "key=value"
    std::string to_text() const;
};

struct RegretReport {
    PolicyKind policy = PolicyKind::uniform;
    std::int64_t budget = 0;
    int replication = 0;
    double avg_regret = 0.0;
    double worst_regret = 0.0;
    double seconds = 0.0;
    std::vector<std::int64_t> pulls;
    bool failed = false;
};

// Plays T exploration steps of `kind` against the stream, revealing only the
// pulled arm's reward each step.
BanditState run_exploration(PolicyKind kind, const PolicyConfig& cfg, Environment& env,
                            std::int64_t budget);

// Average and worst simple regret of the exploitation rule over the given
// contexts. Pure: the state is not modified.
std::pair<double, double> evaluate(PolicyKind kind, const BanditState& state,
                                   const std::vector<EnvStep>& eval_steps,
                                   const PolicyConfig& cfg);

// Full policies x budgets x replications sweep. Within a replication every
// policy replays the same exploration stream (budgets are prefixes of it) and
// is scored on the same evaluation set. Cell failures are recorded as NaN rows.
std::vector<RegretReport> budget_sweep(const ExperimentConfig& config, int jobs = 1,
                                       bool quiet = false);

// Runs one (policy, budget, replication) cell exactly as budget_sweep would.
RegretReport run_cell(const ExperimentConfig& config, PolicyKind kind, std::int64_t budget,
                      int replication);

// Writes `policy,budget,replication,avg_regret,worst_regret,seconds` rows plus
// the `<stem>_hist.csv` sibling with per-arm pull counts.
void write_reports(const std::string& csv_path, const std::vector<RegretReport>& reports);
std::vector<RegretReport> read_reports(const std::string& csv_path);
std::string hist_path_for(const std::string& csv_path);

// Holdout tuning: for each policy, evaluates every applicable grid point on a
// fresh stream and keeps the one with the lowest average regret (first in grid
// order on ties).
std::map<PolicyKind, PolicyParams> grid_search(const ExperimentConfig& config, int jobs = 1,
                                               bool quiet = false);

struct BetaInputs {
    std::int64_t budget = 0;      // T
    double lambda_x = 0.5;        // context covariance eigenvalue floor
    double lambda = 1.0;
    int arms = 2;
    int burn_in = 1;              // N_lambda
    double hardness_sum = 1.0;    // H_eps
    double c1 = 1.0;
    double c2 = 0.0;
};

struct BetaResult {
    double beta = 0.0;
    bool positive = false;
    double min_budget = 0.0;  // smallest T making beta positive
};

BetaResult compute_beta(const BetaInputs& in);

// Squared-width bound g(N) = 8 alpha^2 / (lambda + N lambda_x / 2) and its
// inverse in the width s: g_inverse(sqrt(g(N))) == N.
double g_bound(std::int64_t pulls, double alpha, double lambda, double lambda_x);
double g_inverse(double width, double alpha, double lambda, double lambda_x);

}  // namespace kergap
