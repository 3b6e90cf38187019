#include "kergap/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace kergap {

namespace {

// argmax with lowest index on ties.
template <typename F>
int argmax_over_arms(int arms, F&& value) {
    int best = 0;
    double best_value = value(0);
    for (int a = 1; a < arms; ++a) {
        const double v = value(a);
        if (v > best_value) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

int round_robin_arm(std::int64_t steps_taken, int arms) {
    return static_cast<int>(steps_taken % arms);
}

}  // namespace

PolicyKind policy_kind_from_string(const std::string& name) {
    for (PolicyKind kind : all_policy_kinds())
        if (to_string(kind) == name) return kind;
    throw std::invalid_argument("unknown policy kind: " + name);
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::contextual_gap: return "contextual_gap";
        case PolicyKind::uniform: return "uniform";
        case PolicyKind::epsilon_greedy: return "epsilon_greedy";
        case PolicyKind::kernel_ucb: return "kernel_ucb";
        case PolicyKind::kernel_ucb_mod: return "kernel_ucb_mod";
        case PolicyKind::kernel_ts: return "kernel_ts";
    }
    throw std::logic_error("unreachable policy kind");
}

const std::vector<PolicyKind>& all_policy_kinds() {
    static const std::vector<PolicyKind> kinds{
        PolicyKind::contextual_gap, PolicyKind::uniform,     PolicyKind::epsilon_greedy,
        PolicyKind::kernel_ucb,     PolicyKind::kernel_ucb_mod, PolicyKind::kernel_ts,
    };
    return kinds;
}

void PolicyConfig::validate() const {
    if (arms < 2) throw std::invalid_argument("need at least two arms");
    if (!(params.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(params.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (burn_in < 1) throw std::invalid_argument("burn_in must be at least 1");
    if (history_window < 1) throw std::invalid_argument("history_window must be at least 1");
    if (epsilon_decay < 0.0 || epsilon_decay >= 1.0)
        throw std::invalid_argument("epsilon_decay must lie in [0, 1)");
    if (!(ts_scale > 0.0)) throw std::invalid_argument("ts_scale must be positive");
}

BanditState::BanditState(const PolicyConfig& cfg) {
    cfg.validate();
    arm_states.assign(cfg.arms, ArmState(cfg.kernel, cfg.params.lambda));
    pull_counts.assign(cfg.arms, 0);
}

bool BanditState::in_burn_in(const PolicyConfig& cfg) const {
    return t < static_cast<std::int64_t>(cfg.arms) * cfg.burn_in;
}

void BanditState::observe(int arm, const Vector& x, double reward, const PolicyConfig& cfg) {
    if (arm < 0 || arm >= static_cast<int>(arm_states.size()))
        throw std::invalid_argument("arm index out of range");
    // Snapshot the pre-update state so the live state plus the ring give
    // history_window distinct windows.
    if (cfg.history_window > 1 && !in_burn_in(cfg)) {
        snapshots.push_back(arm_states);
        while (snapshots.size() > static_cast<std::size_t>(cfg.history_window) - 1)
            snapshots.pop_front();
    }
    arm_states[arm].update(x, reward);
    ++pull_counts[arm];
    ++t;
}

std::vector<ConfidenceBundle> all_bundles(const BanditState& state, const Vector& x,
                                          const PolicyConfig& cfg) {
    std::vector<ConfidenceBundle> bundles;
    bundles.reserve(state.arm_states.size());
    for (const ArmState& arm : state.arm_states)
        bundles.push_back(confidence_interval(arm, x, cfg.params));
    return bundles;
}

GapDecision select_contextual_gap(const BanditState& state, const Vector& x,
                                  const PolicyConfig& cfg) {
    if (state.in_burn_in(cfg)) {
        GapDecision d;
        d.chosen = round_robin_arm(state.t, cfg.arms);
        return d;
    }
    return gap_indices(all_bundles(state, x, cfg));
}

int select_baseline(PolicyKind kind, const BanditState& state, const Vector& x,
                    const PolicyConfig& cfg, Rng& rng) {
    if (kind == PolicyKind::uniform || state.in_burn_in(cfg))
        return round_robin_arm(state.t, cfg.arms);
    switch (kind) {
        case PolicyKind::epsilon_greedy: {
            const double eps = std::pow(cfg.epsilon_decay, static_cast<double>(state.t + 1));
            const std::vector<ConfidenceBundle> bundles = all_bundles(state, x, cfg);
            const int greedy =
                argmax_over_arms(cfg.arms, [&](int a) { return bundles[a].mean; });
            if (rng.uniform() >= eps) return greedy;
            const int other = static_cast<int>(rng.below(cfg.arms - 1));
            return other < greedy ? other : other + 1;
        }
        case PolicyKind::kernel_ucb:
        case PolicyKind::kernel_ucb_mod: {
            const std::vector<ConfidenceBundle> bundles = all_bundles(state, x, cfg);
            return argmax_over_arms(cfg.arms, [&](int a) { return bundles[a].upper; });
        }
        case PolicyKind::kernel_ts: {
            const std::vector<ConfidenceBundle> bundles = all_bundles(state, x, cfg);
            int best = 0;
            double best_draw = 0.0;
            for (int a = 0; a < cfg.arms; ++a) {
                const double scale = cfg.ts_scale * bundles[a].sigma / std::sqrt(cfg.params.lambda);
                const double draw = bundles[a].mean + scale * rng.normal();
                if (a == 0 || draw > best_draw) {
                    best = a;
                    best_draw = draw;
                }
            }
            return best;
        }
        default:
            throw std::invalid_argument("not a baseline policy: " + to_string(kind));
    }
}

int select_arm(PolicyKind kind, const BanditState& state, const Vector& x,
               const PolicyConfig& cfg, Rng& rng) {
    if (kind == PolicyKind::contextual_gap) return select_contextual_gap(state, x, cfg).chosen;
    return select_baseline(kind, state, x, cfg, rng);
}

namespace {

// Best-arm index and its gap from one set of per-arm states.
std::pair<int, double> windowed_best(const std::vector<ArmState>& arms, const Vector& x,
                                     const PolicyConfig& cfg) {
    std::vector<ConfidenceBundle> bundles;
    bundles.reserve(arms.size());
    for (const ArmState& arm : arms) bundles.push_back(confidence_interval(arm, x, cfg.params));
    const GapDecision d = gap_indices(bundles);
    return {d.best, d.gaps[d.best]};
}

}  // namespace

int recommend(PolicyKind kind, const BanditState& state, const Vector& x,
              const PolicyConfig& cfg) {
    if (kind == PolicyKind::contextual_gap) {
        auto [best, gap] = windowed_best(state.arm_states, x, cfg);
        // Ties prefer the most recent window, so older snapshots must be
        // strictly better to displace the live answer.
        for (auto it = state.snapshots.rbegin(); it != state.snapshots.rend(); ++it) {
            const auto [b, g] = windowed_best(*it, x, cfg);
            if (g < gap) {
                best = b;
                gap = g;
            }
        }
        return best;
    }
    const std::vector<ConfidenceBundle> bundles = all_bundles(state, x, cfg);
    if (kind == PolicyKind::kernel_ucb)
        return argmax_over_arms(cfg.arms, [&](int a) { return bundles[a].upper; });
    return argmax_over_arms(cfg.arms, [&](int a) { return bundles[a].mean; });
}

}  // namespace kergap
