#include "kergap/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "kergap/confidence.hpp"
#include "kergap/environments.hpp"
#include "kergap/harness.hpp"
#include "kergap/parallel.hpp"
#include "kergap/rng.hpp"

namespace kergap {

namespace {

constexpr double kUnitCircleLambdaX = 0.5;  // smallest eigenvalue of E[x x^T]

double binomial_se(double p, std::int64_t n) {
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

std::string describe(std::initializer_list<std::pair<const char*, double>> kv) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [k, v] : kv) {
        if (!first) out << ", ";
        out << k << "=" << v;
        first = false;
    }
    return out.str();
}

}  // namespace

std::string DiagnosticReport::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["seed"] = seed;
    j["trials"] = trials;
    j["violation_rate"] = violation_rate;
    j["nominal_rate"] = nominal_rate;
    j["slack"] = slack;
    j["standard_error"] = standard_error;
    j["pass"] = pass;
    j["details"] = details;
    return j.dump(2);
}

void DiagnosticReport::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << to_json() << "\n";
}

DiagnosticReport coverage_check(const CoverageOptions& opts) {
    if (!(opts.rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (!(opts.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(opts.alpha_scale > 0.0)) throw std::invalid_argument("alpha_scale must be positive");
    if (opts.trials < 1 || opts.steps < 1 || opts.grid_points < 2)
        throw std::invalid_argument("trials, steps and grid_points must be positive");
    const KernelSpec kernel = make_gaussian(opts.mean_bandwidth);
    const double c1 = opts.rho * std::sqrt(2.0);
    const double noise = opts.noise_sigma.value_or(opts.rho);

    Vector grid(opts.grid_points);
    for (int i = 0; i < opts.grid_points; ++i)
        grid[i] = -1.0 + 2.0 * static_cast<double>(i) / (opts.grid_points - 1);

    std::vector<char> violated(opts.trials, 0);
    run_parallel(static_cast<std::size_t>(opts.trials), opts.jobs, [&](std::size_t trial) {
        Rng rng(mix_seed(opts.seed, trial));
        // Random RKHS function f = sum_m w_m k(., z_m) with known norm.
        constexpr int kTerms = 8;
        Matrix centers(kTerms, 1);
        Vector w(kTerms);
        for (int m = 0; m < kTerms; ++m) {
            centers(m, 0) = rng.uniform(-1.0, 1.0);
            w[m] = rng.normal();
        }
        Matrix gram(kTerms, kTerms);
        for (int i = 0; i < kTerms; ++i)
            for (int k = 0; k < kTerms; ++k)
                gram(i, k) = kernel(centers.row(i).transpose(), centers.row(k).transpose());
        const double f_norm = std::sqrt(std::max(w.dot(gram * w), 0.0));
        auto f = [&](const Vector& x) {
            double v = 0.0;
            for (int m = 0; m < kTerms; ++m) v += w[m] * kernel(centers.row(m).transpose(), x);
            return v;
        };

        std::vector<Vector> xs(opts.steps);
        Vector ys(opts.steps);
        for (std::int64_t t = 0; t < opts.steps; ++t) {
            xs[t] = Vector::Constant(1, rng.uniform(-1.0, 1.0));
            ys[t] = f(xs[t]) + (noise > 0.0 ? noise * rng.normal() : 0.0);
        }

        // The capacity term is taken at the horizon, which dominates every
        // earlier step, so one alpha covers the whole history.
        ArmState full(kernel, opts.lambda);
        for (std::int64_t t = 0; t < opts.steps; ++t) full.update(xs[t], ys[t]);
        const double c2 = c2_estimate(full, opts.rho, f_norm);
        const ConfidenceParams params{opts.alpha_scale * (c1 * opts.beta + c2), opts.lambda};

        ArmState state(kernel, opts.lambda);
        auto covered = [&](const Vector& x) {
            const ConfidenceBundle b = confidence_interval(state, x, params);
            const double v = f(x);
            return b.lower <= v && v <= b.upper;
        };
        auto check_all = [&](std::int64_t next) {
            for (int i = 0; i < opts.grid_points; ++i)
                if (!covered(Vector::Constant(1, grid[i]))) return false;
            if (next < opts.steps && !covered(xs[next])) return false;
            return true;
        };
        for (std::int64_t t = 0; t <= opts.steps; ++t) {
            if (!check_all(t)) {
                violated[trial] = 1;
                return;
            }
            if (t < opts.steps) state.update(xs[t], ys[t]);
        }
    });

    DiagnosticReport report;
    report.name = "coverage";
    report.seed = opts.seed;
    report.trials = opts.trials;
    std::int64_t count = 0;
    for (char v : violated) count += v;
    report.violation_rate = static_cast<double>(count) / static_cast<double>(opts.trials);
    report.nominal_rate = std::exp(-opts.beta * opts.beta);
    report.slack = opts.slack;
    report.standard_error = binomial_se(report.violation_rate, opts.trials);
    report.pass = report.violation_rate <= report.nominal_rate + report.slack;
    report.details = describe({{"beta", opts.beta},
                               {"rho", opts.rho},
                               {"noise", noise},
                               {"lambda", opts.lambda},
                               {"steps", static_cast<double>(opts.steps)},
                               {"grid_points", static_cast<double>(opts.grid_points)}});
    return report;
}

double c2_estimate(const ArmState& state, double rho, double f_norm_bound) {
    if (rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
    if (f_norm_bound < 0.0) throw std::invalid_argument("norm bound must be nonnegative");
    return rho * std::sqrt(state.log_det_capacity()) + std::sqrt(state.lambda()) * f_norm_bound;
}

DiagnosticReport eigen_lower_bound_check(const EigenBoundOptions& opts) {
    if (opts.order != 1 && opts.order != 2)
        throw std::invalid_argument("order must be 1 or 2 on a planar environment");
    if (opts.t_min < 1 || opts.t_max < opts.t_min || opts.trials < 1)
        throw std::invalid_argument("bad time range or trial count");
    if (!(opts.delta > 0.0 && opts.delta <= 0.125))
        throw std::invalid_argument("delta must lie in (0, 1/8]");

    std::vector<char> violated(opts.trials, 0);
    std::vector<double> trace_errs(opts.trials, 0.0);
    run_parallel(static_cast<std::size_t>(opts.trials), opts.jobs, [&](std::size_t trial) {
        Rng rng(mix_seed(opts.seed, trial));
        double s00 = 0.0, s01 = 0.0, s11 = 0.0;
        for (std::int64_t t = 1; t <= opts.t_max; ++t) {
            const double theta = rng.uniform(0.0, 2.0 * M_PI);
            const double c = std::cos(theta), s = std::sin(theta);
            s00 += c * c;
            s01 += c * s;
            s11 += s * s;
            const double tr = s00 + s11;
            trace_errs[trial] = std::max(trace_errs[trial],
                                         std::abs(tr - static_cast<double>(t)));
            if (t < opts.t_min) continue;
            const double det = s00 * s11 - s01 * s01;
            const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
            const double eig = opts.order == 1 ? (tr + disc) / 2.0 : (tr - disc) / 2.0;
            if (eig < static_cast<double>(t) * kUnitCircleLambdaX / 2.0) {
                violated[trial] = 1;
                return;
            }
        }
    });

    DiagnosticReport report;
    report.name = "eigen_lower_bound";
    report.seed = opts.seed;
    report.trials = opts.trials;
    std::int64_t count = 0;
    for (char v : violated) count += v;
    double max_trace_err = 0.0;
    for (double e : trace_errs) max_trace_err = std::max(max_trace_err, e);
    report.violation_rate = static_cast<double>(count) / static_cast<double>(opts.trials);
    report.nominal_rate = opts.delta;
    report.slack = 0.0;
    report.standard_error = binomial_se(report.violation_rate, opts.trials);
    report.pass = report.violation_rate <= opts.delta && max_trace_err <= 1e-8 * opts.t_max;
    report.details = describe({{"order", static_cast<double>(opts.order)},
                               {"t_min", static_cast<double>(opts.t_min)},
                               {"t_max", static_cast<double>(opts.t_max)},
                               {"lambda_x", kUnitCircleLambdaX},
                               {"max_trace_error", max_trace_err}});
    return report;
}

DiagnosticReport width_bound_check(const WidthBoundOptions& opts) {
    if (opts.arms < 2) throw std::invalid_argument("need at least two arms");
    if (opts.runs < 1 || opts.steps < 1) throw std::invalid_argument("runs and steps must be positive");
    if (!(opts.alpha > 0.0) || !(opts.lambda > 0.0))
        throw std::invalid_argument("alpha and lambda must be positive");

    const ConfidenceParams params{opts.alpha, opts.lambda};
    std::vector<char> violated(opts.runs, 0);
    run_parallel(static_cast<std::size_t>(opts.runs), opts.jobs, [&](std::size_t run) {
        EnvSpec spec;
        spec.kind = EnvKind::unit_circle;
        spec.arms = opts.arms;
        spec.noise_sigma = opts.noise_sigma;
        spec.seed = mix_seed(opts.seed, run);
        Environment env(spec);
        std::vector<ArmState> arms(opts.arms, ArmState(make_linear(), opts.lambda));
        for (std::int64_t t = 0; t < opts.steps; ++t) {
            const EnvStep step = env.next();
            const int a = static_cast<int>(t % opts.arms);
            if (arms[a].count() > opts.min_pulls) {
                const ConfidenceBundle b = confidence_interval(arms[a], step.context, params);
                const double bound = g_bound(arms[a].count(), opts.alpha, opts.lambda,
                                             kUnitCircleLambdaX);
                if (b.width * b.width > bound) {
                    violated[run] = 1;
                    return;
                }
            }
            arms[a].update(step.context, step.realized[a]);
        }
    });

    DiagnosticReport report;
    report.name = "width_bound";
    report.seed = opts.seed;
    report.trials = opts.runs;
    std::int64_t count = 0;
    for (char v : violated) count += v;
    report.violation_rate = static_cast<double>(count) / static_cast<double>(opts.runs);
    report.nominal_rate = opts.delta;
    report.slack = opts.slack;
    report.standard_error = binomial_se(report.violation_rate, opts.runs);
    report.pass = report.violation_rate <= opts.delta + opts.slack;
    report.details = describe({{"alpha", opts.alpha},
                               {"lambda", opts.lambda},
                               {"noise", opts.noise_sigma},
                               {"arms", static_cast<double>(opts.arms)},
                               {"steps", static_cast<double>(opts.steps)},
                               {"min_pulls", static_cast<double>(opts.min_pulls)}});
    return report;
}

std::int64_t theoretical_N_lambda(double lambda, double lambda_x, std::int64_t d_star,
                                  std::int64_t d_tilde, double delta) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(lambda_x > 0.0)) throw std::invalid_argument("lambda_x must be positive");
    if (d_star < 1 || d_tilde < d_star) throw std::invalid_argument("bad effective dimensions");
    if (!(delta > 0.0 && delta <= 0.125)) throw std::invalid_argument("delta must lie in (0, 1/8]");
    const double ridge_term = 2.0 * (1.0 - lambda) / lambda_x;
    const double spectral_term =
        (256.0 / (lambda_x * lambda_x)) *
        std::log(128.0 * static_cast<double>(d_tilde) / (lambda_x * lambda_x * delta));
    const double v = std::max({ridge_term, static_cast<double>(d_star), spectral_term});
    return static_cast<std::int64_t>(std::ceil(v));
}

}  // namespace kergap
