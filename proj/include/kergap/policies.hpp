#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "kergap/confidence.hpp"
#include "kergap/rng.hpp"

namespace kergap {

enum class PolicyKind {
    contextual_gap,
    uniform,
    epsilon_greedy,
    kernel_ucb,
    kernel_ucb_mod,
    kernel_ts,
};

PolicyKind policy_kind_from_string(const std::string& name);
std::string to_string(PolicyKind kind);
const std::vector<PolicyKind>& all_policy_kinds();

struct PolicyConfig {
    int arms = 2;
    KernelSpec kernel{};
    ConfidenceParams params{};
    int burn_in = 1;             // N_lambda: round-robin passes before adaptive play
    int history_window = 1;      // W: exploitation snapshots considered
    double epsilon_decay = 0.99; // epsilon_t = epsilon_decay^t
    double ts_scale = 1.0;       // nu: posterior-sampling width multiplier
    std::uint64_t seed = 0;

    void validate() const;  // throws invalid_argument on any bad field
};

// Mutable per-run state shared by every policy.
//
// With history_window > 1 a snapshot of all arm states is pushed after each
// post-burn-in step (ring of W-1; the live state is the W-th window). Snapshots
// are full copies, so memory grows with W * sum_a N_a^2.
struct BanditState {
    explicit BanditState(const PolicyConfig& cfg);

    std::vector<ArmState> arm_states;
    std::vector<std::int64_t> pull_counts;
    std::int64_t t = 0;  // exploration steps taken so far
    std::deque<std::vector<ArmState>> snapshots;

    // Applies the revealed reward for the pulled arm and advances time.
    void observe(int arm, const Vector& x, double reward, const PolicyConfig& cfg);

    bool in_burn_in(const PolicyConfig& cfg) const;
};

// Intervals for every arm at x under the live states.
std::vector<ConfidenceBundle> all_bundles(const BanditState& state, const Vector& x,
                                          const PolicyConfig& cfg);

// Exploration-phase choice. Steps 1..arms*burn_in are round-robin; afterwards
// the gap rule from gap_indices. The decision's `chosen` is the arm to pull.
GapDecision select_contextual_gap(const BanditState& state, const Vector& x,
                                  const PolicyConfig& cfg);

// Exploration-phase choice for the baselines. All kinds share the round-robin
// burn-in, then: uniform keeps cycling; epsilon_greedy exploits argmax mean with
// probability 1 - decay^t and otherwise picks uniformly among the other arms;
// kernel_ucb and kernel_ucb_mod take argmax upper; kernel_ts samples
// Normal(mean_a, (nu sigma_a / sqrt(lambda))^2) per arm and takes the argmax.
int select_baseline(PolicyKind kind, const BanditState& state, const Vector& x,
                    const PolicyConfig& cfg, Rng& rng);

// Dispatches to the gap rule or a baseline.
int select_arm(PolicyKind kind, const BanditState& state, const Vector& x,
               const PolicyConfig& cfg, Rng& rng);

// Exploitation-phase recommendation at x. The gap policy returns the best-arm
// index J from the live states (history_window 1) or from whichever of the W
// most recent snapshots has the smallest gap at x (ties: most recent).
// kernel_ucb recommends argmax upper; every other baseline argmax mean.
int recommend(PolicyKind kind, const BanditState& state, const Vector& x,
              const PolicyConfig& cfg);

}  // namespace kergap
