#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kergap/arm_state.hpp"

namespace kergap {

struct DiagnosticReport {
    std::string name;
    std::uint64_t seed = 0;
    std::int64_t trials = 0;
    double violation_rate = 0.0;
    double nominal_rate = 0.0;   // theoretical ceiling the rate is held against
    double slack = 0.0;          // tolerance added to the ceiling
    double standard_error = 0.0; // sqrt(p (1 - p) / trials)
    bool pass = false;
    std::string details;

    std::string to_json() const;
    void write(const std::string& path) const;
};

// Empirical coverage of the interval mean +- alpha sigma / sqrt(lambda) with
// alpha = c1 beta + c2, c1 = rho sqrt(2), c2 from the capacity bound. Each
// trial draws a random function from a gaussian RKHS, observes it under
// Normal(0, rho^2) noise along a uniform context stream, and flags the trial
// if the true value escapes the interval at any step, checked on a fixed query
// grid plus the visited contexts. Pass: rate <= exp(-beta^2) + slack.
struct CoverageOptions {
    double beta = 2.0;
    double rho = 0.1;           // sub-gaussian parameter entering c1 and c2
    std::optional<double> noise_sigma;  // actual noise scale; defaults to rho
    double alpha_scale = 1.0;   // multiplies c1 beta + c2; < 1 starves the interval
    double lambda = 1.0;
    double mean_bandwidth = 0.5;
    std::int64_t steps = 30;    // observations per trial
    int grid_points = 17;
    std::int64_t trials = 2000;
    double slack = 0.01;
    std::uint64_t seed = 7;
    int jobs = 1;
};
DiagnosticReport coverage_check(const CoverageOptions& opts);

// rho sqrt(log det(I + K / lambda)) + sqrt(lambda) * f_norm_bound.
double c2_estimate(const ArmState& state, double rho, double f_norm_bound);

// Draws unit-circle context streams and checks the spectral floor
// lambda_r(S_t) >= t lambda_x / 2 for all t in [t_min, t_max] (lambda_x = 1/2).
// A trial violates if the floor fails anywhere in the range. Pass: rate <= delta.
struct EigenBoundOptions {
    int order = 2;              // r: which eigenvalue, 1 or 2
    std::int64_t t_min = 200;
    std::int64_t t_max = 1000;
    std::int64_t trials = 1000;
    double delta = 0.1;
    std::uint64_t seed = 11;
    int jobs = 1;
};
DiagnosticReport eigen_lower_bound_check(const EigenBoundOptions& opts);

// Round-robin play on the unit-circle environment with a linear kernel,
// checking the squared interval width against g(N) = 8 alpha^2/(lambda + N/4)
// at every step where the arm has more than `min_pulls` observations. A run
// violates if any checked step exceeds the bound. Pass: rate <= delta + slack.
struct WidthBoundOptions {
    double alpha = 1.0;
    double lambda = 1.0;
    double noise_sigma = 0.0;
    int arms = 2;
    std::int64_t steps = 400;   // exploration length per run
    std::int64_t min_pulls = 10;
    std::int64_t runs = 200;
    double delta = 0.125;
    double slack = 0.05;
    std::uint64_t seed = 13;
    int jobs = 1;
};
DiagnosticReport width_bound_check(const WidthBoundOptions& opts);

// ceil(max(2 (1 - lambda) / lambda_x, d_star, (256 / lambda_x^2)
//      log(128 d_tilde / (lambda_x^2 delta)))).
std::int64_t theoretical_N_lambda(double lambda, double lambda_x, std::int64_t d_star,
                                  std::int64_t d_tilde, double delta);

}  // namespace kergap
