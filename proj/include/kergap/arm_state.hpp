#pragma once

#include <cstdint>

#include "kergap/kernel.hpp"

namespace kergap {

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;  // clamped to [0, k(x, x)]
};

// Incremental kernel ridge regression state for one arm.
//
// Maintains (K + lambda I)^-1 over the observed contexts via rank-one Schur
// extensions, the running log det(K + lambda I), and the dual weights
// (K + lambda I)^-1 y so posterior means are O(N).
class ArmState {
  public:
    ArmState() = default;
    ArmState(KernelSpec kernel, double lambda);

    // Absorbs one (context, reward) pair. O(N^2).
    // Throws degeneracy_error if the Schur complement k(x,x) + lambda - k^T inv k
    // falls below 1e-12, and invalid_argument on dimension mismatch.
    void update(const Vector& x, double reward);

    // Posterior mean and variance at x. O(N^2), dominated by the variance term.
    Posterior posterior(const Vector& x) const;

    // log det(K + lambda I) - N log lambda = log det(I + K / lambda); 0 when empty.
    double log_det_capacity() const;

    std::int64_t count() const { return count_; }
    double lambda() const { return lambda_; }
    const KernelSpec& kernel() const { return kernel_; }
    double log_det() const { return log_det_; }  // log det(K + lambda I); 0 when empty

    // Views over the live prefix of the growable buffers.
    Eigen::Ref<const Matrix> inverse() const { return inv_.topLeftCorner(count_, count_); }
    Eigen::Ref<const Matrix> contexts() const { return contexts_.topRows(count_); }
    Eigen::Ref<const Vector> rewards() const { return rewards_.head(count_); }
    Eigen::Ref<const Vector> weights() const { return weights_.head(count_); }

    // k(x, x_i) for every stored context. O(N d) kernel evaluations.
    Vector kernel_column(const Vector& x) const;

  private:
    void reserve(std::int64_t capacity);
    void check_dimension(const Vector& x) const;

    KernelSpec kernel_{};
    double lambda_ = 1.0;
    std::int64_t count_ = 0;
    std::int64_t dim_ = -1;
    double log_det_ = 0.0;
    Matrix contexts_;  // rows are contexts
    Vector rewards_;
    Matrix inv_;       // (K + lambda I)^-1 in the top-left count_ x count_ block
    Vector weights_;   // inv_ * rewards_
};

}  // namespace kergap
