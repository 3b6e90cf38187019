#include "kergap/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kergap {

ConfidenceBundle confidence_interval(const ArmState& state, const Vector& x,
                                     const ConfidenceParams& params) {
    if (!(params.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (params.lambda != state.lambda())
        throw std::invalid_argument("confidence lambda " + std::to_string(params.lambda) +
                                    " does not match regression lambda " +
                                    std::to_string(state.lambda()));
    const Posterior p = state.posterior(x);
    ConfidenceBundle b;
    b.mean = p.mean;
    b.sigma = std::sqrt(p.variance);
    b.width = 2.0 * params.alpha * b.sigma / std::sqrt(params.lambda);
    b.lower = b.mean - b.width / 2.0;
    b.upper = b.mean + b.width / 2.0;
    return b;
}

GapDecision gap_indices(const std::vector<ConfidenceBundle>& bundles) {
    const int arms = static_cast<int>(bundles.size());
    if (arms < 2) throw std::invalid_argument("gap indices need at least two arms");
    // Two largest uppers give max_{i != a} upper[i] for every a in one pass.
    int top = 0;
    for (int a = 1; a < arms; ++a)
        if (bundles[a].upper > bundles[top].upper) top = a;
    int second = top == 0 ? 1 : 0;
    for (int a = 0; a < arms; ++a)
        if (a != top && bundles[a].upper > bundles[second].upper) second = a;

    GapDecision d;
    d.gaps.resize(arms);
    d.widths.resize(arms);
    for (int a = 0; a < arms; ++a) {
        const double rival = a == top ? bundles[second].upper : bundles[top].upper;
        d.gaps[a] = rival - bundles[a].lower;
        d.widths[a] = bundles[a].width;
    }
    d.best = 0;
    for (int a = 1; a < arms; ++a)
        if (d.gaps[a] < d.gaps[d.best]) d.best = a;
    d.runner_up = d.best == 0 ? 1 : 0;
    for (int a = 0; a < arms; ++a)
        if (a != d.best && bundles[a].upper > bundles[d.runner_up].upper) d.runner_up = a;
    // Of the two candidates, pull the one known less precisely.
    const double wb = d.widths[d.best];
    const double wr = d.widths[d.runner_up];
    if (wb == wr)
        d.chosen = std::min(d.best, d.runner_up);
    else
        d.chosen = wb > wr ? d.best : d.runner_up;
    return d;
}

double hardness(double delta, double eps) {
    if (delta < 0.0) throw std::invalid_argument("gap must be nonnegative");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    return std::max(0.5 * (delta + eps), eps);
}

}  // namespace kergap
