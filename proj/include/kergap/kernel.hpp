#pragma once

#include <Eigen/Dense>
#include <string>

namespace kergap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class KernelFamily { gaussian, linear };

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

// Positive-definite kernel plus the constant L bounding sup_x sqrt(k(x, x)).
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double bandwidth = 1.0;   // gaussian only
    double bound = 1.0;       // L; 1 for gaussian, sup ||x|| for linear

    // k(x, y). Gaussian: exp(-||x - y||^2 / (2 bw^2)). Linear: <x, y>.
    double operator()(const Vector& x, const Vector& y) const;
};

KernelSpec make_gaussian(double bandwidth);
KernelSpec make_linear(double bound = 1.0);

}  // namespace kergap
