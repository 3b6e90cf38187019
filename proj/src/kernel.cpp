#include "kergap/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace kergap {

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "linear") return KernelFamily::linear;
    throw std::invalid_argument("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
    return family == KernelFamily::gaussian ? "gaussian" : "linear";
}

double KernelSpec::operator()(const Vector& x, const Vector& y) const {
    if (x.size() != y.size())
        throw std::invalid_argument("kernel arguments differ in dimension: " +
                                    std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    if (x.size() == 0) throw std::invalid_argument("kernel arguments are empty");
    switch (family) {
        case KernelFamily::gaussian:
            return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
        case KernelFamily::linear:
            return x.dot(y);
    }
    throw std::logic_error("unreachable kernel family");
}

KernelSpec make_gaussian(double bandwidth) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    return KernelSpec{KernelFamily::gaussian, bandwidth, 1.0};
}

KernelSpec make_linear(double bound) {
    if (!(bound > 0.0)) throw std::invalid_argument("kernel bound must be positive");
    return KernelSpec{KernelFamily::linear, 1.0, bound};
}

}  // namespace kergap
