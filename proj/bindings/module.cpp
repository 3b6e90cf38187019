#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kergap/diagnostics.hpp"
#include "kergap/errors.hpp"
#include "kergap/harness.hpp"
#include "kergap/version.hpp"

namespace py = pybind11;
using namespace kergap;

namespace {

// Python-side policies and environments are addressed by name.
PolicyKind kind_of(const std::string& name) { return policy_kind_from_string(name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "kernel contextual bandits with gap-based exploration";
    m.attr("__version__") = kVersion;

    py::register_exception<degeneracy_error>(m, "DegeneracyError", PyExc_ArithmeticError);
    py::register_exception<end_of_data>(m, "EndOfData", PyExc_StopIteration);
    py::register_exception<unsupported_error>(m, "UnsupportedError", PyExc_ValueError);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init<>())
        .def_readwrite("bandwidth", &KernelSpec::bandwidth)
        .def_readwrite("bound", &KernelSpec::bound)
        .def("__call__", &KernelSpec::operator(), py::arg("x"), py::arg("y"),
             "Evaluate k(x, y).");
    m.def("make_gaussian", &make_gaussian, py::arg("bandwidth"),
          "Gaussian kernel exp(-|x-y|^2 / (2 bw^2)).");
    m.def("make_linear", &make_linear, py::arg("bound") = 1.0, "Linear kernel <x, y>.");

    py::class_<Posterior>(m, "Posterior")
        .def_readonly("mean", &Posterior::mean)
        .def_readonly("variance", &Posterior::variance);

    py::class_<ArmState>(m, "ArmState")
        .def(py::init<KernelSpec, double>(), py::arg("kernel"), py::arg("lam"))
        .def("update", &ArmState::update, py::arg("x"), py::arg("reward"),
             "Absorb one observation (rank-one inverse update).")
        .def("posterior", &ArmState::posterior, py::arg("x"))
        .def("log_det_capacity", &ArmState::log_det_capacity)
        .def_property_readonly("count", &ArmState::count)
        .def_property_readonly("lam", &ArmState::lambda);

    py::class_<ConfidenceParams>(m, "ConfidenceParams")
        .def(py::init([](double alpha, double lam) {
                 return ConfidenceParams{alpha, lam};
             }),
             py::arg("alpha") = 1.0, py::arg("lam") = 1.0)
        .def_readwrite("alpha", &ConfidenceParams::alpha)
        .def_readwrite("lam", &ConfidenceParams::lambda);

    py::class_<ConfidenceBundle>(m, "ConfidenceBundle")
        .def(py::init([](double mean, double sigma, double width, double lower, double upper) {
                 return ConfidenceBundle{mean, sigma, width, lower, upper};
             }),
             py::arg("mean") = 0.0, py::arg("sigma") = 0.0, py::arg("width") = 0.0,
             py::arg("lower") = 0.0, py::arg("upper") = 0.0)
        .def_readwrite("mean", &ConfidenceBundle::mean)
        .def_readwrite("sigma", &ConfidenceBundle::sigma)
        .def_readwrite("width", &ConfidenceBundle::width)
        .def_readwrite("lower", &ConfidenceBundle::lower)
        .def_readwrite("upper", &ConfidenceBundle::upper);

    py::class_<GapDecision>(m, "GapDecision")
        .def_readonly("gaps", &GapDecision::gaps)
        .def_readonly("widths", &GapDecision::widths)
        .def_readonly("best", &GapDecision::best)
        .def_readonly("runner_up", &GapDecision::runner_up)
        .def_readonly("chosen", &GapDecision::chosen);

    m.def("confidence_interval", &confidence_interval, py::arg("state"), py::arg("x"),
          py::arg("params"));
    m.def("gap_indices", &gap_indices, py::arg("bundles"));
    m.def("hardness", &hardness, py::arg("gap"), py::arg("eps"));

    py::class_<PolicyConfig>(m, "PolicyConfig")
        .def(py::init<>())
        .def_readwrite("arms", &PolicyConfig::arms)
        .def_readwrite("kernel", &PolicyConfig::kernel)
        .def_readwrite("params", &PolicyConfig::params)
        .def_readwrite("burn_in", &PolicyConfig::burn_in)
        .def_readwrite("history_window", &PolicyConfig::history_window)
        .def_readwrite("epsilon_decay", &PolicyConfig::epsilon_decay)
        .def_readwrite("ts_scale", &PolicyConfig::ts_scale)
        .def_readwrite("seed", &PolicyConfig::seed);

    py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>(), py::arg("seed"));

    py::class_<BanditState>(m, "BanditState")
        .def(py::init<const PolicyConfig&>(), py::arg("cfg"))
        .def("observe", &BanditState::observe, py::arg("arm"), py::arg("x"), py::arg("reward"),
             py::arg("cfg"))
        .def_readonly("pull_counts", &BanditState::pull_counts)
        .def_readonly("t", &BanditState::t);

    m.def(
        "select_arm",
        [](const std::string& kind, const BanditState& state, const Vector& x,
           const PolicyConfig& cfg, Rng& rng) { return select_arm(kind_of(kind), state, x, cfg, rng); },
        py::arg("kind"), py::arg("state"), py::arg("x"), py::arg("cfg"), py::arg("rng"));
    m.def(
        "recommend",
        [](const std::string& kind, const BanditState& state, const Vector& x,
           const PolicyConfig& cfg) { return recommend(kind_of(kind), state, x, cfg); },
        py::arg("kind"), py::arg("state"), py::arg("x"), py::arg("cfg"));

    py::class_<EnvSpec>(m, "EnvSpec")
        .def(py::init<>())
        .def_property(
            "kind", [](const EnvSpec& s) { return to_string(s.kind); },
            [](EnvSpec& s, const std::string& name) { s.kind = env_kind_from_string(name); })
        .def_readwrite("arms", &EnvSpec::arms)
        .def_readwrite("dims", &EnvSpec::dims)
        .def_readwrite("noise_sigma", &EnvSpec::noise_sigma)
        .def_readwrite("ar_coefficient", &EnvSpec::ar_coefficient)
        .def_readwrite("seed", &EnvSpec::seed)
        .def_readwrite("path", &EnvSpec::path)
        .def_readwrite("frequencies", &EnvSpec::frequencies)
        .def_readwrite("offsets", &EnvSpec::offsets);

    py::class_<EnvStep>(m, "EnvStep")
        .def_readonly("context", &EnvStep::context)
        .def_readonly("realized", &EnvStep::realized)
        .def_readonly("means", &EnvStep::means)
        .def_readonly("has_means", &EnvStep::has_means);

    py::class_<Environment>(m, "Environment")
        .def(py::init<EnvSpec>(), py::arg("spec"))
        .def("next", &Environment::next)
        .def("reset", &Environment::reset, py::arg("seed"))
        .def("shuffle", &Environment::shuffle, py::arg("seed"))
        .def("means_at", &Environment::means_at, py::arg("x"))
        .def_property_readonly("arms", &Environment::arms)
        .def_property_readonly("dims", &Environment::dims)
        .def_property_readonly("rows", &Environment::rows)
        .def_static("from_csv", &Environment::from_csv, py::arg("path"));
    m.def("simple_regret", &simple_regret, py::arg("step"), py::arg("arm"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_static("from_file", &ExperimentConfig::from_file, py::arg("path"))
        .def_static("from_string", &ExperimentConfig::from_string, py::arg("text"))
        .def("apply_override", &ExperimentConfig::apply_override, py::arg("assignment"))
        .def("to_text", &ExperimentConfig::to_text)
        .def("validate", &ExperimentConfig::validate)
        .def_readwrite("env", &ExperimentConfig::env)
        .def_property(
            "policies",
            [](const ExperimentConfig& c) {
                std::vector<std::string> names;
                names.reserve(c.policies.size());
                for (PolicyKind kind : c.policies) names.push_back(to_string(kind));
                return names;
            },
            [](ExperimentConfig& c, const std::vector<std::string>& names) {
                c.policies.clear();
                c.policies.reserve(names.size());
                for (const std::string& name : names) c.policies.push_back(kind_of(name));
            })
        .def_readwrite("budgets", &ExperimentConfig::budgets)
        .def_readwrite("replications", &ExperimentConfig::replications)
        .def_readwrite("eval_size", &ExperimentConfig::eval_size)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("output", &ExperimentConfig::output);

    py::class_<RegretReport>(m, "RegretReport")
        .def_property_readonly("policy", [](const RegretReport& r) { return to_string(r.policy); })
        .def_readonly("budget", &RegretReport::budget)
        .def_readonly("replication", &RegretReport::replication)
        .def_readonly("avg_regret", &RegretReport::avg_regret)
        .def_readonly("worst_regret", &RegretReport::worst_regret)
        .def_readonly("seconds", &RegretReport::seconds)
        .def_readonly("pulls", &RegretReport::pulls)
        .def_readonly("failed", &RegretReport::failed);

    m.def(
        "run_exploration",
        [](const std::string& kind, const PolicyConfig& cfg, Environment& env,
           std::int64_t budget) { return run_exploration(kind_of(kind), cfg, env, budget); },
        py::arg("kind"), py::arg("cfg"), py::arg("env"), py::arg("budget"));
    m.def(
        "evaluate",
        [](const std::string& kind, const BanditState& state, const std::vector<EnvStep>& steps,
           const PolicyConfig& cfg) { return evaluate(kind_of(kind), state, steps, cfg); },
        py::arg("kind"), py::arg("state"), py::arg("eval_steps"), py::arg("cfg"));
    m.def("budget_sweep", &budget_sweep, py::arg("config"), py::arg("jobs") = 1,
          py::arg("quiet") = true);
    m.def("run_cell",
          [](const ExperimentConfig& config, const std::string& kind, std::int64_t budget,
             int replication) { return run_cell(config, kind_of(kind), budget, replication); },
          py::arg("config"), py::arg("policy"), py::arg("budget"), py::arg("replication"));
    m.def("write_reports", &write_reports, py::arg("csv_path"), py::arg("reports"));

    py::class_<BetaInputs>(m, "BetaInputs")
        .def(py::init<>())
        .def_readwrite("budget", &BetaInputs::budget)
        .def_readwrite("lambda_x", &BetaInputs::lambda_x)
        .def_readwrite("lam", &BetaInputs::lambda)
        .def_readwrite("arms", &BetaInputs::arms)
        .def_readwrite("burn_in", &BetaInputs::burn_in)
        .def_readwrite("hardness_sum", &BetaInputs::hardness_sum)
        .def_readwrite("c1", &BetaInputs::c1)
        .def_readwrite("c2", &BetaInputs::c2);
    py::class_<BetaResult>(m, "BetaResult")
        .def_readonly("beta", &BetaResult::beta)
        .def_readonly("positive", &BetaResult::positive)
        .def_readonly("min_budget", &BetaResult::min_budget);
    m.def("compute_beta", &compute_beta, py::arg("inputs"));
    m.def("g_bound", &g_bound, py::arg("pulls"), py::arg("alpha"), py::arg("lam"),
          py::arg("lambda_x"));
    m.def("g_inverse", &g_inverse, py::arg("width"), py::arg("alpha"), py::arg("lam"),
          py::arg("lambda_x"));

    py::class_<DiagnosticReport>(m, "DiagnosticReport")
        .def_readonly("name", &DiagnosticReport::name)
        .def_readonly("seed", &DiagnosticReport::seed)
        .def_readonly("trials", &DiagnosticReport::trials)
        .def_readonly("violation_rate", &DiagnosticReport::violation_rate)
        .def_readonly("nominal_rate", &DiagnosticReport::nominal_rate)
        .def_readonly("slack", &DiagnosticReport::slack)
        .def_readonly("standard_error", &DiagnosticReport::standard_error)
        .def_readonly("pass_", &DiagnosticReport::pass)
        .def_readonly("details", &DiagnosticReport::details)
        .def("to_json", &DiagnosticReport::to_json);

    py::class_<CoverageOptions>(m, "CoverageOptions")
        .def(py::init<>())
        .def_readwrite("beta", &CoverageOptions::beta)
        .def_readwrite("rho", &CoverageOptions::rho)
        .def_readwrite("noise_sigma", &CoverageOptions::noise_sigma)
        .def_readwrite("alpha_scale", &CoverageOptions::alpha_scale)
        .def_readwrite("lam", &CoverageOptions::lambda)
        .def_readwrite("mean_bandwidth", &CoverageOptions::mean_bandwidth)
        .def_readwrite("steps", &CoverageOptions::steps)
        .def_readwrite("grid_points", &CoverageOptions::grid_points)
        .def_readwrite("trials", &CoverageOptions::trials)
        .def_readwrite("slack", &CoverageOptions::slack)
        .def_readwrite("seed", &CoverageOptions::seed)
        .def_readwrite("jobs", &CoverageOptions::jobs);
    m.def("coverage_check", &coverage_check, py::arg("options"));
    m.def("c2_estimate", &c2_estimate, py::arg("state"), py::arg("rho"),
          py::arg("f_norm_bound"));

    py::class_<EigenBoundOptions>(m, "EigenBoundOptions")
        .def(py::init<>())
        .def_readwrite("order", &EigenBoundOptions::order)
        .def_readwrite("t_min", &EigenBoundOptions::t_min)
        .def_readwrite("t_max", &EigenBoundOptions::t_max)
        .def_readwrite("trials", &EigenBoundOptions::trials)
        .def_readwrite("delta", &EigenBoundOptions::delta)
        .def_readwrite("seed", &EigenBoundOptions::seed)
        .def_readwrite("jobs", &EigenBoundOptions::jobs);
    m.def("eigen_lower_bound_check", &eigen_lower_bound_check, py::arg("options"));

    py::class_<WidthBoundOptions>(m, "WidthBoundOptions")
        .def(py::init<>())
        .def_readwrite("alpha", &WidthBoundOptions::alpha)
        .def_readwrite("lam", &WidthBoundOptions::lambda)
        .def_readwrite("noise_sigma", &WidthBoundOptions::noise_sigma)
        .def_readwrite("arms", &WidthBoundOptions::arms)
        .def_readwrite("steps", &WidthBoundOptions::steps)
        .def_readwrite("min_pulls", &WidthBoundOptions::min_pulls)
        .def_readwrite("runs", &WidthBoundOptions::runs)
        .def_readwrite("delta", &WidthBoundOptions::delta)
        .def_readwrite("slack", &WidthBoundOptions::slack)
        .def_readwrite("seed", &WidthBoundOptions::seed)
        .def_readwrite("jobs", &WidthBoundOptions::jobs);
    m.def("width_bound_check", &width_bound_check, py::arg("options"));

    m.def("theoretical_N_lambda", &theoretical_N_lambda, py::arg("lam"), py::arg("lambda_x"),
          py::arg("d_star"), py::arg("d_tilde"), py::arg("delta"));
}
