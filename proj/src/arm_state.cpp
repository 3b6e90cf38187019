#include "kergap/arm_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kergap/errors.hpp"

namespace kergap {

namespace {
constexpr double kSchurFloor = 1e-12;
constexpr std::int64_t kInitialCapacity = 16;
}  // namespace

ArmState::ArmState(KernelSpec kernel, double lambda) : kernel_(kernel), lambda_(lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("ridge parameter must be positive");
}

void ArmState::check_dimension(const Vector& x) const {
    if (x.size() == 0) throw std::invalid_argument("context is empty");
    if (dim_ >= 0 && x.size() != dim_)
        throw std::invalid_argument("context dimension " + std::to_string(x.size()) +
                                    " does not match stored dimension " + std::to_string(dim_));
}

void ArmState::reserve(std::int64_t capacity) {
    if (inv_.rows() >= capacity) return;
    const std::int64_t grown = std::max({capacity, kInitialCapacity, inv_.rows() * 2});
    Matrix inv(grown, grown);
    Matrix contexts(grown, std::max<std::int64_t>(dim_, 1));
    Vector rewards(grown), weights(grown);
    if (count_ > 0) {
        inv.topLeftCorner(count_, count_) = inv_.topLeftCorner(count_, count_);
        contexts.topRows(count_) = contexts_.topRows(count_);
        rewards.head(count_) = rewards_.head(count_);
        weights.head(count_) = weights_.head(count_);
    }
    inv_.swap(inv);
    contexts_.swap(contexts);
    rewards_.swap(rewards);
    weights_.swap(weights);
}

Vector ArmState::kernel_column(const Vector& x) const {
    check_dimension(x);
    Vector k(count_);
    for (std::int64_t i = 0; i < count_; ++i) k[i] = kernel_(contexts_.row(i).transpose(), x);
    return k;
}

void ArmState::update(const Vector& x, double reward) {
    check_dimension(x);
    if (!std::isfinite(reward)) throw std::invalid_argument("reward must be finite");
    const double kxx = kernel_(x, x);
    if (count_ == 0) {
        dim_ = x.size();
        reserve(1);
        const double schur = kxx + lambda_;
        if (schur <= kSchurFloor)
            throw degeneracy_error("vanishing pivot k(x,x) + lambda = " + std::to_string(schur));
        contexts_.row(0) = x.transpose();
        rewards_[0] = reward;
        inv_(0, 0) = 1.0 / schur;
        weights_[0] = reward / schur;
        log_det_ = std::log(schur);
        count_ = 1;
        return;
    }
    const Vector k = kernel_column(x);
    reserve(count_ + 1);
    const Vector u = inv_.topLeftCorner(count_, count_) * k;
    const double schur = kxx + lambda_ - k.dot(u);
    if (schur <= kSchurFloor)
        throw degeneracy_error("vanishing Schur complement " + std::to_string(schur) +
                               " at count " + std::to_string(count_));
    const double pivot = 1.0 / schur;
    // Block inverse: [[inv + u u^T / schur, -u / schur], [-u^T / schur, 1 / schur]].
    inv_.topLeftCorner(count_, count_) += pivot * (u * u.transpose());
    inv_.col(count_).head(count_) = -pivot * u;
    inv_.row(count_).head(count_) = -pivot * u.transpose();
    inv_(count_, count_) = pivot;
    contexts_.row(count_) = x.transpose();
    rewards_[count_] = reward;
    log_det_ += std::log(schur);
    ++count_;
    weights_.head(count_) = inv_.topLeftCorner(count_, count_) * rewards_.head(count_);
}

Posterior ArmState::posterior(const Vector& x) const {
    if (count_ == 0) {
        if (x.size() == 0) throw std::invalid_argument("context is empty");
        return Posterior{0.0, kernel_(x, x)};
    }
    check_dimension(x);
    const Vector k = kernel_column(x);
    const double kxx = kernel_(x, x);
    Posterior p;
    p.mean = k.dot(weights_.head(count_));
    const Vector v = inv_.topLeftCorner(count_, count_) * k;
    p.variance = std::clamp(kxx - k.dot(v), 0.0, kxx);
    return p;
}

double ArmState::log_det_capacity() const {
    if (count_ == 0) return 0.0;
    return log_det_ - static_cast<double>(count_) * std::log(lambda_);
}

}  // namespace kergap
