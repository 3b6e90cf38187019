#include "kergap/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "kergap/errors.hpp"
#include "kergap/format.hpp"

namespace kergap {

namespace {

constexpr int kRkhsTerms = 20;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error("not a number: '" + s + "'", line);
    }
}

long parse_header_int(const std::string& field, const std::string& key) {
    const auto eq = field.find('=');
    if (eq == std::string::npos || trim(field.substr(0, eq)) != key)
        throw parse_error("expected '" + key + "=<int>' in header, got '" + field + "'", 1);
    try {
        return std::stol(trim(field.substr(eq + 1)));
    } catch (const std::exception&) {
        throw parse_error("bad integer for '" + key + "' in header", 1);
    }
}

}  // namespace

EnvKind env_kind_from_string(const std::string& name) {
    if (name == "synthetic_sine") return EnvKind::synthetic_sine;
    if (name == "ar1_sensor") return EnvKind::ar1_sensor;
    if (name == "unit_circle") return EnvKind::unit_circle;
    if (name == "csv") return EnvKind::csv;
    throw std::invalid_argument("unknown environment kind: " + name);
}

std::string to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::synthetic_sine: return "synthetic_sine";
        case EnvKind::ar1_sensor: return "ar1_sensor";
        case EnvKind::unit_circle: return "unit_circle";
        case EnvKind::csv: return "csv";
    }
    throw std::logic_error("unreachable env kind");
}

void EnvSpec::validate() const {
    if (arms < 2) throw std::invalid_argument("environment needs at least two arms");
    if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be nonnegative");
    if (kind == EnvKind::ar1_sensor) {
        if (dims < 1) throw std::invalid_argument("ar1_sensor needs dims >= 1");
        if (std::abs(ar_coefficient) >= 1.0)
            throw std::invalid_argument("ar_coefficient must lie in (-1, 1)");
    }
    if (kind == EnvKind::csv && path.empty())
        throw std::invalid_argument("csv environment needs a path");
    if (!frequencies.empty() && static_cast<int>(frequencies.size()) != arms)
        throw std::invalid_argument("frequencies must list one value per arm");
    if (!offsets.empty() && static_cast<int>(offsets.size()) != arms)
        throw std::invalid_argument("offsets must list one value per arm");
    if (kind != EnvKind::synthetic_sine && !(frequencies.empty() && offsets.empty()))
        throw std::invalid_argument("frequencies/offsets apply to synthetic_sine only");
}

double simple_regret(const EnvStep& step, int arm) {
    if (arm < 0 || arm >= step.realized.size())
        throw std::invalid_argument("arm index out of range");
    if (!step.has_means)
        throw unsupported_error("simple regret needs true means, which this data lacks");
    return step.means.maxCoeff() - step.means[arm];
}

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
    spec_.validate();
    if (spec_.kind == EnvKind::csv) {
        const std::uint64_t seed = spec_.seed;
        const double noise = spec_.noise_sigma;
        *this = from_csv(spec_.path);
        spec_.seed = seed;
        spec_.noise_sigma = noise;
        return;
    }
    init_fixed_draws();
}

int Environment::dims() const {
    switch (spec_.kind) {
        case EnvKind::synthetic_sine: return 1;
        case EnvKind::unit_circle: return 2;
        case EnvKind::ar1_sensor: return spec_.dims;
        case EnvKind::csv: return spec_.dims;
    }
    throw std::logic_error("unreachable env kind");
}

void Environment::init_fixed_draws() {
    // Arm-defining draws come from a sub-stream of the seed so that reset()
    // never changes the mean functions.
    Rng fixed(mix_seed(spec_.seed, 0x5eed));
    if (spec_.kind == EnvKind::unit_circle) {
        arm_weights_.clear();
        for (int a = 0; a < spec_.arms; ++a) {
            const double psi = fixed.uniform(0.0, 2.0 * M_PI);
            Vector w(2);
            w << std::cos(psi), std::sin(psi);
            arm_weights_.push_back(w);
        }
    } else if (spec_.kind == EnvKind::ar1_sensor) {
        mean_kernel_ = make_gaussian(std::sqrt(static_cast<double>(spec_.dims)));
        rkhs_centers_.clear();
        rkhs_weights_.clear();
        for (int a = 0; a < spec_.arms; ++a) {
            Matrix centers(kRkhsTerms, spec_.dims);
            Vector weights(kRkhsTerms);
            for (int m = 0; m < kRkhsTerms; ++m) {
                for (int d = 0; d < spec_.dims; ++d) centers(m, d) = fixed.normal();
                weights[m] = fixed.normal() / std::sqrt(static_cast<double>(kRkhsTerms));
            }
            rkhs_centers_.push_back(std::move(centers));
            rkhs_weights_.push_back(std::move(weights));
        }
    }
}

Vector Environment::means_at(const Vector& x) const {
    Vector means(spec_.arms);
    switch (spec_.kind) {
        case EnvKind::synthetic_sine: {
            if (x.size() != 1) throw std::invalid_argument("scalar context expected");
            for (int a = 0; a < spec_.arms; ++a) {
                const double freq =
                    spec_.frequencies.empty() ? static_cast<double>(a + 1) : spec_.frequencies[a];
                const double off = spec_.offsets.empty() ? 0.0 : spec_.offsets[a];
                means[a] = std::sin(freq * x[0]) + off;
            }
            return means;
        }
        case EnvKind::unit_circle: {
            if (x.size() != 2) throw std::invalid_argument("planar context expected");
            for (int a = 0; a < spec_.arms; ++a) means[a] = arm_weights_[a].dot(x);
            return means;
        }
        case EnvKind::ar1_sensor: {
            if (x.size() != spec_.dims) throw std::invalid_argument("context dimension mismatch");
            for (int a = 0; a < spec_.arms; ++a) {
                double v = 0.0;
                for (int m = 0; m < kRkhsTerms; ++m)
                    v += rkhs_weights_[a][m] * mean_kernel_(rkhs_centers_[a].row(m).transpose(), x);
                means[a] = v;
            }
            return means;
        }
        case EnvKind::csv:
            throw unsupported_error("csv data carries no mean function");
    }
    throw std::logic_error("unreachable env kind");
}

EnvStep Environment::generated_step() {
    EnvStep step;
    switch (spec_.kind) {
        case EnvKind::synthetic_sine: {
            step.context = Vector::Constant(1, rng_.uniform(0.0, 2.0 * M_PI));
            break;
        }
        case EnvKind::unit_circle: {
            const double theta = rng_.uniform(0.0, 2.0 * M_PI);
            step.context = Vector(2);
            step.context << std::cos(theta), std::sin(theta);
            break;
        }
        case EnvKind::ar1_sensor: {
            Vector noise(spec_.dims);
            for (int d = 0; d < spec_.dims; ++d) noise[d] = rng_.normal();
            if (!ar_started_) {
                ar_state_ = noise;  // stationary start
                ar_started_ = true;
            } else {
                const double c = spec_.ar_coefficient;
                ar_state_ = c * ar_state_ + std::sqrt(1.0 - c * c) * noise;
            }
            step.context = ar_state_;
            break;
        }
        case EnvKind::csv:
            throw std::logic_error("csv steps are not generated");
    }
    step.means = means_at(step.context);
    step.has_means = true;
    step.realized = step.means;
    if (spec_.noise_sigma > 0.0)
        for (int a = 0; a < spec_.arms; ++a) step.realized[a] += spec_.noise_sigma * rng_.normal();
    return step;
}

EnvStep Environment::next() {
    if (spec_.kind != EnvKind::csv) return generated_step();
    if (cursor_ >= static_cast<std::int64_t>(order_.size()))
        throw end_of_data("csv stream exhausted after " + std::to_string(order_.size()) + " rows");
    return rows_[order_[cursor_++]];
}

void Environment::reset(std::uint64_t seed) {
    spec_.seed = seed;
    rng_ = Rng(seed);
    cursor_ = 0;
    ar_started_ = false;
    if (spec_.kind == EnvKind::csv) std::iota(order_.begin(), order_.end(), std::size_t{0});
}

void Environment::shuffle(std::uint64_t seed) {
    if (spec_.kind != EnvKind::csv)
        throw unsupported_error("shuffle applies to csv data; generated streams reseed instead");
    Rng rng(seed);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    for (std::size_t i = order_.size(); i > 1; --i)
        std::swap(order_[i - 1], order_[rng.below(i)]);
    cursor_ = 0;
}

Environment Environment::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("missing header", 1);
    const std::vector<std::string> header = split_fields(line);
    if (header.size() < 2) throw parse_error("header needs at least d=<int>,A=<int>", 1);
    const long dims = parse_header_int(header[0], "d");
    const long arms = parse_header_int(header[1], "A");
    bool with_means = false;
    if (header.size() >= 3 && !header[2].empty())
        with_means = parse_header_int(header[2], "means") != 0;
    if (dims < 1 || arms < 2) throw schema_error("header declares d=" + std::to_string(dims) +
                                                 ", A=" + std::to_string(arms));

    EnvSpec spec;
    spec.kind = EnvKind::csv;
    spec.arms = static_cast<int>(arms);
    spec.dims = static_cast<int>(dims);
    spec.path = path;

    Environment env(EnvSpec{});  // placeholder, replaced field by field below
    env.spec_ = spec;
    env.rows_.clear();
    const std::size_t expected = static_cast<std::size_t>(dims + arms * (with_means ? 2 : 1));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        while (fields.size() > expected && fields.back().empty()) fields.pop_back();
        if (fields.size() != expected)
            throw schema_error("row " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(expected));
        EnvStep step;
        step.context = Vector(dims);
        step.realized = Vector(arms);
        for (long d = 0; d < dims; ++d) step.context[d] = parse_double(fields[d], line_no);
        for (long a = 0; a < arms; ++a) step.realized[a] = parse_double(fields[dims + a], line_no);
        if (with_means) {
            step.means = Vector(arms);
            for (long a = 0; a < arms; ++a)
                step.means[a] = parse_double(fields[dims + arms + a], line_no);
            step.has_means = true;
        }
        env.rows_.push_back(std::move(step));
    }
    env.order_.resize(env.rows_.size());
    std::iota(env.order_.begin(), env.order_.end(), std::size_t{0});
    env.cursor_ = 0;
    return env;
}

void Environment::save_csv(const std::string& path, const std::vector<EnvStep>& steps, int dims,
                           int arms, bool with_means) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << "d=" << dims << ",A=" << arms << ",means=" << (with_means ? 1 : 0) << "\n";
    for (const EnvStep& step : steps) {
        if (step.context.size() != dims || step.realized.size() != arms)
            throw std::invalid_argument("step shape does not match declared header");
        if (with_means && !step.has_means)
            throw std::invalid_argument("means requested but a step lacks them");
        for (int d = 0; d < dims; ++d) out << format_double(step.context[d]) << ',';
        for (int a = 0; a < arms; ++a) {
            out << format_double(step.realized[a]);
            if (a + 1 < arms || with_means) out << ',';
        }
        if (with_means)
            for (int a = 0; a < arms; ++a) {
                out << format_double(step.means[a]);
                if (a + 1 < arms) out << ',';
            }
        out << "\n";
    }
}

}  // namespace kergap
