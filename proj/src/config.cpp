#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "kergap/errors.hpp"
#include "kergap/format.hpp"
#include "kergap/harness.hpp"

namespace kergap {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_doubles(const std::string& value) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string field;
    while (std::getline(in, field, ',')) {
        field = trim(field);
        if (!field.empty()) out.push_back(std::stod(field));
    }
    return out;
}

std::vector<std::int64_t> parse_ints(const std::string& value) {
    std::vector<std::int64_t> out;
    for (double v : parse_doubles(value)) out.push_back(static_cast<std::int64_t>(v));
    return out;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::string join(const std::vector<std::int64_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

// "policy.<kind>.<field>" per-policy override keys.
bool apply_policy_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key.rfind("policy.", 0) != 0) return false;
    const auto dot = key.find('.', 7);
    if (dot == std::string::npos) throw std::invalid_argument("bad key: " + key);
    const PolicyKind kind = policy_kind_from_string(key.substr(7, dot - 7));
    const std::string field = key.substr(dot + 1);
    PolicyParams& p = cfg.overrides[kind];
    const double v = std::stod(value);
    if (field == "bandwidth") p.bandwidth = v;
    else if (field == "lambda") p.lambda = v;
    else if (field == "alpha") p.alpha = v;
    else if (field == "epsilon_decay") p.epsilon_decay = v;
    else if (field == "ts_scale") p.ts_scale = v;
    else throw std::invalid_argument("unknown policy field: " + field);
    return true;
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (apply_policy_key(cfg, key, value)) return;
    if (key == "env.kind") cfg.env.kind = env_kind_from_string(value);
    else if (key == "env.arms") cfg.env.arms = std::stoi(value);
    else if (key == "env.dims") cfg.env.dims = std::stoi(value);
    else if (key == "env.noise_sigma") cfg.env.noise_sigma = std::stod(value);
    else if (key == "env.ar_coefficient") cfg.env.ar_coefficient = std::stod(value);
    else if (key == "env.path") cfg.env.path = value;
    else if (key == "env.frequencies") cfg.env.frequencies = parse_doubles(value);
    else if (key == "env.offsets") cfg.env.offsets = parse_doubles(value);
    else if (key == "policies") {
        cfg.policies.clear();
        std::istringstream in(value);
        std::string name;
        while (std::getline(in, name, ','))
            if (!trim(name).empty()) cfg.policies.push_back(policy_kind_from_string(trim(name)));
    } else if (key == "budgets") cfg.budgets = parse_ints(value);
    else if (key == "replications") cfg.replications = std::stoi(value);
    else if (key == "eval_size") cfg.eval_size = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "output") cfg.output = value;
    else if (key == "kernel.family") cfg.kernel_family = kernel_family_from_string(value);
    else if (key == "kernel.bandwidth") cfg.bandwidth = std::stod(value);
    else if (key == "lambda") cfg.lambda = std::stod(value);
    else if (key == "alpha") cfg.alpha = std::stod(value);
    else if (key == "burn_in") cfg.burn_in = std::stoi(value);
    else if (key == "history_window") cfg.history_window = std::stoi(value);
    else if (key == "epsilon_decay") cfg.epsilon_decay = std::stod(value);
    else if (key == "ts_scale") cfg.ts_scale = std::stod(value);
    else if (key == "grid.bandwidths") cfg.grid.bandwidths = parse_doubles(value);
    else if (key == "grid.lambdas") cfg.grid.lambdas = parse_doubles(value);
    else if (key == "grid.alphas") cfg.grid.alphas = parse_doubles(value);
    else if (key == "grid.epsilon_decays") cfg.grid.epsilon_decays = parse_doubles(value);
    else if (key == "grid.ts_scales") cfg.grid.ts_scales = parse_doubles(value);
    else if (key == "tune.budget") cfg.tune_budget = std::stoll(value);
    else if (key == "tune.eval_size") cfg.tune_eval_size = std::stoi(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw parse_error("expected key = value", line_no);
        try {
            apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const parse_error&) {
            throw;
        } catch (const std::exception& e) {
            throw parse_error(e.what(), line_no);
        }
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return from_string(text.str());
}

void ExperimentConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must be key=value: " + assignment);
    apply_key(*this, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    out << "env.kind = " << to_string(env.kind) << "\n";
    out << "env.arms = " << env.arms << "\n";
    out << "env.dims = " << env.dims << "\n";
    out << "env.noise_sigma = " << format_double(env.noise_sigma) << "\n";
    out << "env.ar_coefficient = " << format_double(env.ar_coefficient) << "\n";
    if (!env.path.empty()) out << "env.path = " << env.path << "\n";
    if (!env.frequencies.empty()) out << "env.frequencies = " << join(env.frequencies) << "\n";
    if (!env.offsets.empty()) out << "env.offsets = " << join(env.offsets) << "\n";
    out << "policies = ";
    for (std::size_t i = 0; i < policies.size(); ++i)
        out << (i ? "," : "") << to_string(policies[i]);
    out << "\n";
    out << "budgets = " << join(budgets) << "\n";
    out << "replications = " << replications << "\n";
    out << "eval_size = " << eval_size << "\n";
    out << "seed = " << seed << "\n";
    out << "output = " << output << "\n";
    out << "kernel.family = " << to_string(kernel_family) << "\n";
    out << "kernel.bandwidth = " << format_double(bandwidth) << "\n";
    out << "lambda = " << format_double(lambda) << "\n";
    out << "alpha = " << format_double(alpha) << "\n";
    out << "burn_in = " << burn_in << "\n";
    out << "history_window = " << history_window << "\n";
    out << "epsilon_decay = " << format_double(epsilon_decay) << "\n";
    out << "ts_scale = " << format_double(ts_scale) << "\n";
    out << "grid.bandwidths = " << join(grid.bandwidths) << "\n";
    out << "grid.lambdas = " << join(grid.lambdas) << "\n";
    out << "grid.alphas = " << join(grid.alphas) << "\n";
    out << "grid.epsilon_decays = " << join(grid.epsilon_decays) << "\n";
    out << "grid.ts_scales = " << join(grid.ts_scales) << "\n";
    out << "tune.budget = " << tune_budget << "\n";
    out << "tune.eval_size = " << tune_eval_size << "\n";
    for (const auto& [kind, p] : overrides) {
        const std::string prefix = "policy." + to_string(kind) + ".";
        if (p.bandwidth) out << prefix << "bandwidth = " << format_double(*p.bandwidth) << "\n";
        if (p.lambda) out << prefix << "lambda = " << format_double(*p.lambda) << "\n";
        if (p.alpha) out << prefix << "alpha = " << format_double(*p.alpha) << "\n";
        if (p.epsilon_decay)
            out << prefix << "epsilon_decay = " << format_double(*p.epsilon_decay) << "\n";
        if (p.ts_scale) out << prefix << "ts_scale = " << format_double(*p.ts_scale) << "\n";
    }
    return out.str();
}

}  // namespace kergap
