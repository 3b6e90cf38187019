#include "kergap/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <tuple>

#include "kergap/errors.hpp"
#include "kergap/format.hpp"
#include "kergap/parallel.hpp"

namespace kergap {

namespace {

// Sub-stream tags for deriving independent seeds from (seed, replication).
enum : std::uint64_t { kExploreTag = 1, kEvalTag = 2, kShuffleTag = 3, kPolicyTag = 100 };

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double merged(const std::optional<double>& v, double fallback) { return v.value_or(fallback); }

}  // namespace

void ExperimentConfig::validate() const {
    env.validate();
    if (policies.empty()) throw std::invalid_argument("no policies configured");
    for (std::size_t i = 0; i < policies.size(); ++i)
        for (std::size_t k = i + 1; k < policies.size(); ++k)
            if (policies[i] == policies[k])
                throw std::invalid_argument("duplicate policy: " + to_string(policies[i]));
    if (budgets.empty()) throw std::invalid_argument("no budgets configured");
    const std::int64_t floor = static_cast<std::int64_t>(env.arms) * burn_in;
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] <= floor)
            throw std::invalid_argument("budget " + std::to_string(budgets[i]) +
                                        " is not past the burn-in floor " + std::to_string(floor));
        if (i > 0 && budgets[i] <= budgets[i - 1])
            throw std::invalid_argument("budgets must be strictly increasing");
    }
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    if (eval_size < 1) throw std::invalid_argument("eval_size must be at least 1");
    if (output.empty()) throw std::invalid_argument("output path is empty");
    if (tune_budget <= floor) throw std::invalid_argument("tune.budget is not past burn-in");
    if (tune_eval_size < 1) throw std::invalid_argument("tune.eval_size must be at least 1");
    auto positive = [](const std::vector<double>& v, const char* name) {
        if (v.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
        for (double x : v)
            if (!(x > 0.0)) throw std::invalid_argument(std::string(name) + " grid must be positive");
    };
    positive(grid.bandwidths, "bandwidth");
    positive(grid.lambdas, "lambda");
    positive(grid.alphas, "alpha");
    positive(grid.ts_scales, "ts_scale");
    if (grid.epsilon_decays.empty()) throw std::invalid_argument("epsilon_decay grid is empty");
    for (double e : grid.epsilon_decays)
        if (e < 0.0 || e >= 1.0) throw std::invalid_argument("epsilon_decay grid must lie in [0, 1)");
    policy_config_for(policies.front()).validate();
}

PolicyConfig ExperimentConfig::policy_config_for(PolicyKind kind, std::uint64_t run_seed) const {
    PolicyParams p;
    if (const auto it = overrides.find(kind); it != overrides.end()) p = it->second;
    PolicyConfig cfg;
    cfg.arms = env.arms;
    const double bw = merged(p.bandwidth, bandwidth);
    cfg.kernel = kernel_family == KernelFamily::gaussian ? make_gaussian(bw) : make_linear();
    cfg.params.alpha = merged(p.alpha, alpha);
    cfg.params.lambda = merged(p.lambda, lambda);
    cfg.burn_in = burn_in;
    cfg.history_window = history_window;
    cfg.epsilon_decay = merged(p.epsilon_decay, epsilon_decay);
    cfg.ts_scale = merged(p.ts_scale, ts_scale);
    cfg.seed = run_seed;
    return cfg;
}

BanditState run_exploration(PolicyKind kind, const PolicyConfig& cfg, Environment& env,
                            std::int64_t budget) {
    cfg.validate();
    if (budget < static_cast<std::int64_t>(cfg.arms) * cfg.burn_in + 1)
        throw std::invalid_argument("budget must exceed the burn-in phase");
    BanditState state(cfg);
    Rng rng(cfg.seed);
    for (std::int64_t t = 0; t < budget; ++t) {
        const EnvStep step = env.next();
        const int arm = select_arm(kind, state, step.context, cfg, rng);
        state.observe(arm, step.context, step.realized[arm], cfg);
    }
    return state;
}

std::pair<double, double> evaluate(PolicyKind kind, const BanditState& state,
                                   const std::vector<EnvStep>& eval_steps,
                                   const PolicyConfig& cfg) {
    if (eval_steps.empty()) throw std::invalid_argument("no evaluation contexts");
    double total = 0.0;
    double worst = 0.0;
    for (const EnvStep& step : eval_steps) {
        const int arm = recommend(kind, state, step.context, cfg);
        const double r = simple_regret(step, arm);
        total += r;
        worst = std::max(worst, r);
    }
    return {total / static_cast<double>(eval_steps.size()), worst};
}

namespace {

// Exploration stream and shared evaluation set for one replication.
struct ReplicationData {
    Environment explore_env;
    std::vector<EnvStep> eval_steps;
};

ReplicationData replication_data(const ExperimentConfig& config, int replication) {
    if (config.env.kind == EnvKind::csv) {
        Environment env(config.env);
        const std::int64_t need = config.budgets.back() + config.eval_size;
        if (env.rows() < need)
            throw schema_error("csv has " + std::to_string(env.rows()) + " rows, need " +
                               std::to_string(need));
        env.shuffle(mix_seed(config.seed, replication, kShuffleTag));
        // The tail rows are the evaluation set, fixed across budgets.
        Environment tail = env;
        for (std::int64_t i = 0; i < env.rows() - config.eval_size; ++i) tail.next();
        std::vector<EnvStep> eval_steps;
        eval_steps.reserve(config.eval_size);
        for (int i = 0; i < config.eval_size; ++i) eval_steps.push_back(tail.next());
        return {std::move(env), std::move(eval_steps)};
    }
    EnvSpec spec = config.env;
    spec.seed = mix_seed(config.seed, replication, kExploreTag);
    Environment explore_env(spec);
    spec.seed = mix_seed(config.seed, replication, kEvalTag);
    Environment eval_env(spec);
    std::vector<EnvStep> eval_steps;
    eval_steps.reserve(config.eval_size);
    for (int i = 0; i < config.eval_size; ++i) eval_steps.push_back(eval_env.next());
    return {std::move(explore_env), std::move(eval_steps)};
}

std::uint64_t policy_seed(const ExperimentConfig& config, PolicyKind kind, int replication) {
    return mix_seed(config.seed, replication, kPolicyTag + static_cast<std::uint64_t>(kind));
}

}  // namespace

RegretReport run_cell(const ExperimentConfig& config, PolicyKind kind, std::int64_t budget,
                      int replication) {
    RegretReport report;
    report.policy = kind;
    report.budget = budget;
    report.replication = replication;
    const auto start = std::chrono::steady_clock::now();
    ReplicationData data = replication_data(config, replication);
    if (data.explore_env.arms() != config.env.arms)
        throw schema_error("data has " + std::to_string(data.explore_env.arms()) +
                           " arms, config declares " + std::to_string(config.env.arms));
    const PolicyConfig cfg = config.policy_config_for(kind, policy_seed(config, kind, replication));
    const BanditState state = run_exploration(kind, cfg, data.explore_env, budget);
    std::tie(report.avg_regret, report.worst_regret) = evaluate(kind, state, data.eval_steps, cfg);
    report.pulls = state.pull_counts;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<RegretReport> budget_sweep(const ExperimentConfig& config, int jobs, bool quiet) {
    config.validate();
    struct Cell {
        PolicyKind policy;
        std::int64_t budget;
        int replication;
    };
    std::vector<Cell> cells;
    for (PolicyKind kind : config.policies)
        for (std::int64_t budget : config.budgets)
            for (int rep = 0; rep < config.replications; ++rep) cells.push_back({kind, budget, rep});
    std::vector<RegretReport> reports(cells.size());
    std::mutex log_lock;
    run_parallel(cells.size(), jobs, [&](std::size_t i) {
        const Cell& cell = cells[i];
        try {
            reports[i] = run_cell(config, cell.policy, cell.budget, cell.replication);
        } catch (const std::exception& e) {
            RegretReport failed;
            failed.policy = cell.policy;
            failed.budget = cell.budget;
            failed.replication = cell.replication;
            failed.avg_regret = std::numeric_limits<double>::quiet_NaN();
            failed.worst_regret = std::numeric_limits<double>::quiet_NaN();
            failed.failed = true;
            reports[i] = failed;
            std::scoped_lock lock(log_lock);
            std::cerr << "cell " << to_string(cell.policy) << "/" << cell.budget << "/"
                      << cell.replication << " failed: " << e.what() << "\n";
        }
        if (!quiet) {
            std::scoped_lock lock(log_lock);
            std::cerr << "done " << to_string(cell.policy) << " budget " << cell.budget
                      << " rep " << cell.replication << "\n";
        }
    });
    return reports;
}

std::string hist_path_for(const std::string& csv_path) {
    const auto dot = csv_path.rfind('.');
    if (dot == std::string::npos || csv_path.find('/', dot) != std::string::npos)
        return csv_path + "_hist.csv";
    return csv_path.substr(0, dot) + "_hist" + csv_path.substr(dot);
}

void write_reports(const std::string& csv_path, const std::vector<RegretReport>& reports) {
    std::ofstream out(csv_path);
    if (!out) throw std::invalid_argument("cannot write " + csv_path);
    out << "policy,budget,replication,avg_regret,worst_regret,seconds\n";
    for (const RegretReport& r : reports)
        out << to_string(r.policy) << ',' << r.budget << ',' << r.replication << ','
            << format_double(r.avg_regret) << ',' << format_double(r.worst_regret) << ','
            << format_double(r.seconds) << "\n";
    std::ofstream hist(hist_path_for(csv_path));
    if (!hist) throw std::invalid_argument("cannot write " + hist_path_for(csv_path));
    hist << "policy,budget,replication,arm,pulls\n";
    for (const RegretReport& r : reports)
        for (std::size_t a = 0; a < r.pulls.size(); ++a)
            hist << to_string(r.policy) << ',' << r.budget << ',' << r.replication << ','
                 << (a + 1) << ',' << r.pulls[a] << "\n";
}

std::vector<RegretReport> read_reports(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::invalid_argument("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("missing header", 1);
    if (trim(line) != "policy,budget,replication,avg_regret,worst_regret,seconds")
        throw schema_error("unexpected report header: " + line);
    std::vector<RegretReport> reports;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        std::string policy, budget, replication, avg, worst, seconds;
        if (!std::getline(fields, policy, ',') || !std::getline(fields, budget, ',') ||
            !std::getline(fields, replication, ',') || !std::getline(fields, avg, ',') ||
            !std::getline(fields, worst, ',') || !std::getline(fields, seconds))
            throw parse_error("expected 6 fields", line_no);
        RegretReport r;
        r.policy = policy_kind_from_string(trim(policy));
        r.budget = std::stoll(budget);
        r.replication = std::stoi(replication);
        r.avg_regret = std::stod(avg);
        r.worst_regret = std::stod(worst);
        r.seconds = std::stod(seconds);
        r.failed = std::isnan(r.avg_regret);
        reports.push_back(r);
    }
    return reports;
}

std::map<PolicyKind, PolicyParams> grid_search(const ExperimentConfig& config, int jobs,
                                               bool quiet) {
    config.validate();
    struct Point {
        PolicyKind policy;
        PolicyParams params;
    };
    std::vector<Point> points;
    for (PolicyKind kind : config.policies) {
        for (double bw : config.grid.bandwidths)
            for (double lam : config.grid.lambdas) {
                // Only the axis the policy actually reads is swept.
                std::vector<PolicyParams> variants;
                switch (kind) {
                    case PolicyKind::epsilon_greedy:
                        for (double e : config.grid.epsilon_decays) {
                            PolicyParams p;
                            p.epsilon_decay = e;
                            variants.push_back(p);
                        }
                        break;
                    case PolicyKind::kernel_ts:
                        for (double nu : config.grid.ts_scales) {
                            PolicyParams p;
                            p.ts_scale = nu;
                            variants.push_back(p);
                        }
                        break;
                    case PolicyKind::uniform:
                        variants.emplace_back();
                        break;
                    default:  // width-driven policies sweep alpha
                        for (double a : config.grid.alphas) {
                            PolicyParams p;
                            p.alpha = a;
                            variants.push_back(p);
                        }
                        break;
                }
                for (PolicyParams p : variants) {
                    p.bandwidth = bw;
                    p.lambda = lam;
                    points.push_back({kind, p});
                }
            }
    }
    // Holdout streams are derived from a tag of their own so tuning never
    // touches the sweep's data.
    ExperimentConfig ho = config;
    ho.seed = mix_seed(config.seed, 0x601d);
    ho.budgets = {config.tune_budget};
    ho.eval_size = config.tune_eval_size;
    std::vector<double> scores(points.size());
    run_parallel(points.size(), jobs, [&](std::size_t i) {
        ExperimentConfig trial = ho;
        trial.overrides[points[i].policy] = points[i].params;
        scores[i] = run_cell(trial, points[i].policy, config.tune_budget, 0).avg_regret;
        if (!quiet) std::cerr << "tuned point " << i + 1 << "/" << points.size() << "\n";
    });
    std::map<PolicyKind, PolicyParams> best;
    std::map<PolicyKind, double> best_score;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point& pt = points[i];
        const auto it = best_score.find(pt.policy);
        // Strict improvement only, so ties keep the first point in grid order.
        if (it == best_score.end() || scores[i] < it->second) {
            best_score[pt.policy] = scores[i];
            best[pt.policy] = pt.params;
        }
    }
    return best;
}

BetaResult compute_beta(const BetaInputs& in) {
    if (!(in.lambda_x > 0.0)) throw std::invalid_argument("lambda_x must be positive");
    if (!(in.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(in.hardness_sum > 0.0)) throw std::invalid_argument("hardness sum must be positive");
    if (!(in.c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
    if (in.c2 < 0.0) throw std::invalid_argument("c2 must be nonnegative");
    if (in.arms < 2) throw std::invalid_argument("need at least two arms");
    if (in.burn_in < 1) throw std::invalid_argument("burn_in must be at least 1");
    BetaResult out;
    const double adjusted =
        static_cast<double>(in.budget) - static_cast<double>(in.burn_in) * (in.arms - 1);
    const double numerator = in.lambda_x * adjusted + 2.0 * in.arms * in.lambda;
    const double denominator = 16.0 * in.c1 * in.c1 * in.hardness_sum;
    if (numerator < 0.0)
        out.beta = -in.c2 / in.c1;
    else
        out.beta = std::sqrt(numerator / denominator) - in.c2 / in.c1;
    out.positive = out.beta > 0.0;
    out.min_budget = (16.0 * in.hardness_sum * in.c2 * in.c2 - 2.0 * in.arms * in.lambda) /
                         in.lambda_x +
                     static_cast<double>(in.burn_in) * (in.arms - 1);
    return out;
}

double g_bound(std::int64_t pulls, double alpha, double lambda, double lambda_x) {
    if (pulls < 0) throw std::invalid_argument("pull count must be nonnegative");
    if (!(alpha > 0.0) || !(lambda > 0.0) || !(lambda_x > 0.0))
        throw std::invalid_argument("alpha, lambda and lambda_x must be positive");
    return 8.0 * alpha * alpha / (lambda + static_cast<double>(pulls) * lambda_x / 2.0);
}

double g_inverse(double width, double alpha, double lambda, double lambda_x) {
    if (!(width > 0.0)) throw std::invalid_argument("width must be positive");
    if (!(alpha > 0.0) || !(lambda > 0.0) || !(lambda_x > 0.0))
        throw std::invalid_argument("alpha, lambda and lambda_x must be positive");
    return 16.0 * alpha * alpha / (width * width * lambda_x) - 2.0 * lambda / lambda_x;
}

}  // namespace kergap
