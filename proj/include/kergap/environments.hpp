#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kergap/kernel.hpp"
#include "kergap/rng.hpp"

namespace kergap {

enum class EnvKind { synthetic_sine, ar1_sensor, unit_circle, csv };

EnvKind env_kind_from_string(const std::string& name);
std::string to_string(EnvKind kind);

struct EnvSpec {
    EnvKind kind = EnvKind::synthetic_sine;
    int arms = 20;
    int dims = 1;              // ar1_sensor only; sine is scalar, unit_circle is 2-d
    double noise_sigma = 0.0;
    double ar_coefficient = 0.9;
    std::uint64_t seed = 0;
    std::string path;          // csv only
    // synthetic_sine shape: means[a] = sin(frequencies[a] * x) + offsets[a].
    // Defaults (empty) are frequencies 1..arms and offsets 0.
    std::vector<double> frequencies;
    std::vector<double> offsets;

    void validate() const;
};

struct EnvStep {
    Vector context;
    Vector realized;  // one reward per arm; the harness reveals only the pulled one
    Vector means;     // true means, empty when unknown
    bool has_means = false;
};

// max_a means[a] - means[arm]; throws unsupported_error when means are absent.
double simple_regret(const EnvStep& step, int arm);

// Seeded context/reward stream. Generated kinds are unbounded; csv streams are
// finite and throw end_of_data when exhausted.
class Environment {
  public:
    explicit Environment(EnvSpec spec);

    const EnvSpec& spec() const { return spec_; }
    int arms() const { return spec_.arms; }
    int dims() const;

    EnvStep next();
    void reset(std::uint64_t seed);    // restart the stream under a new seed
    void shuffle(std::uint64_t seed);  // csv only: permute row order

    // True means at an arbitrary context (generated kinds only).
    Vector means_at(const Vector& x) const;

    std::int64_t rows() const { return static_cast<std::int64_t>(rows_.size()); }  // csv only

    static Environment from_csv(const std::string& path);
    static void save_csv(const std::string& path, const std::vector<EnvStep>& steps, int dims,
                         int arms, bool with_means);

  private:
    void init_fixed_draws();
    EnvStep generated_step();

    EnvSpec spec_;
    Rng rng_;
    std::int64_t cursor_ = 0;
    Vector ar_state_;                  // ar1_sensor: previous context
    bool ar_started_ = false;
    std::vector<Vector> arm_weights_;  // unit_circle: per-arm direction
    std::vector<Matrix> rkhs_centers_; // ar1_sensor: per-arm expansion centers
    std::vector<Vector> rkhs_weights_; // ar1_sensor: per-arm expansion weights
    KernelSpec mean_kernel_{};         // ar1_sensor: kernel of the mean expansion
    std::vector<EnvStep> rows_;        // csv contents
    std::vector<std::size_t> order_;   // csv row permutation
};

}  // namespace kergap
