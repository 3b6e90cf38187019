#pragma once

#include <vector>

#include "kergap/arm_state.hpp"

namespace kergap {

struct ConfidenceParams {
    double alpha = 1.0;   // width multiplier, > 0
    double lambda = 1.0;  // must equal the regression ridge parameter
};

struct ConfidenceBundle {
    double mean = 0.0;
    double sigma = 0.0;  // posterior standard deviation
    double width = 0.0;  // 2 * alpha * sigma / sqrt(lambda)
    double lower = 0.0;  // mean - width / 2
    double upper = 0.0;  // mean + width / 2
};

constexpr int kNoArm = -1;

// Gap quantities over one context. Arms are 0-based.
struct GapDecision {
    std::vector<double> gaps;    // B[a] = max_{i != a} upper[i] - lower[a]
    std::vector<double> widths;  // width[a], convenience copy
    int best = kNoArm;           // J: argmin gaps, lowest index on ties
    int runner_up = kNoArm;      // j: argmax_{a != J} upper, lowest index on ties
    int chosen = kNoArm;         // filled by the selection rule, kNoArm here
};

// Interval for one arm at x. Throws invalid_argument if params.lambda does not
// equal the state's ridge parameter or alpha is not positive.
ConfidenceBundle confidence_interval(const ArmState& state, const Vector& x,
                                     const ConfidenceParams& params);

// Contextual gaps plus the (J, j) pair. Needs at least two arms.
GapDecision gap_indices(const std::vector<ConfidenceBundle>& bundles);

// max(0.5 * (delta + eps), eps); both arguments nonnegative, eps > 0.
double hardness(double delta, double eps);

}  // namespace kergap
