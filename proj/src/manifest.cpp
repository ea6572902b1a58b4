#include "pinnflow/manifest.hpp"

#include "pinnflow/csv.hpp"
#include "pinnflow/util.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace pinnflow {

std::string to_string(RunMode mode) {
    return mode == RunMode::Fixed ? "fixed" : "adaptive";
}

RunMode run_mode_from_string(const std::string& text) {
    if (text == "fixed") {
        return RunMode::Fixed;
    }
    if (text == "adaptive") {
        return RunMode::Adaptive;
    }
    throw ConfigError("mode: expected 'fixed' or 'adaptive', got '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return s.substr(b, e - b);
}

struct KeySetter {
    std::function<void(RunManifest&, const std::string&, const std::string&)> apply;
};

double parse_double(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const double parsed = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
    return parsed;
}

long long parse_integer(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const long long parsed = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0') {
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
    return parsed;
}

int parse_int(const std::string& key, const std::string& value) {
    return static_cast<int>(parse_integer(key, value));
}

void apply_key(RunManifest& m, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string full = section.empty() ? key : section + "." + key;

    if (section.empty()) {
        if (key == "mode") {
            m.mode = run_mode_from_string(value);
        } else if (key == "seed") {
            m.seed = static_cast<std::uint64_t>(parse_integer(full, value));
        } else if (key == "output_dir") {
            m.output_dir = value;
        } else {
            throw ConfigError("unknown key '" + full + "'");
        }
        return;
    }

    if (section == "problem") {
        ProblemConfig& p = m.problem;
        if (key == "l") p.l = parse_double(full, value);
        else if (key == "T") p.T = parse_double(full, value);
        else if (key == "k") p.k = parse_double(full, value);
        else if (key == "mu1") p.mu1 = parse_double(full, value);
        else if (key == "mu2") p.mu2 = parse_double(full, value);
        else if (key == "p_in") p.p_in = parse_double(full, value);
        else if (key == "p_out") p.p_out = parse_double(full, value);
        else throw ConfigError("unknown key '" + full + "'");
        return;
    }
    if (section == "weights") {
        CostWeights& w = m.weights;
        if (key == "lambda_v") w.lambda_v = parse_double(full, value);
        else if (key == "lambda_c") w.lambda_c = parse_double(full, value);
        else if (key == "lambda_p") w.lambda_p = parse_double(full, value);
        else if (key == "lambda_1") w.lambda_1 = parse_double(full, value);
        else if (key == "lambda_2") w.lambda_2 = parse_double(full, value);
        else if (key == "lambda_3") w.lambda_3 = parse_double(full, value);
        else throw ConfigError("unknown key '" + full + "'");
        return;
    }
    if (section == "adam") {
        AdamConfig& a = m.adam;
        if (key == "learning_rate") a.learning_rate = parse_double(full, value);
        else if (key == "beta1") a.beta1 = parse_double(full, value);
        else if (key == "beta2") a.beta2 = parse_double(full, value);
        else if (key == "epsilon") a.epsilon = parse_double(full, value);
        else if (key == "iterations") a.iterations = parse_int(full, value);
        else throw ConfigError("unknown key '" + full + "'");
        return;
    }
    if (section == "adaptivity") {
        AdaptivityConfig& a = m.adaptivity;
        if (key == "max_steps") a.max_steps = parse_int(full, value);
        else if (key == "iterations_per_step") a.iterations_per_step = parse_int(full, value);
        else if (key == "eps_f1") a.eps_f1 = parse_double(full, value);
        else if (key == "eps_f2") a.eps_f2 = parse_double(full, value);
        else if (key == "eps_f3") a.eps_f3 = parse_double(full, value);
        else if (key == "eps_v") a.eps_v = parse_double(full, value);
        else if (key == "eps_c") a.eps_c = parse_double(full, value);
        else if (key == "eps_p") a.eps_p = parse_double(full, value);
        else if (key == "filter_epsilon") a.filter_epsilon = parse_double(full, value);
        else if (key == "points_per_step") a.points_per_step = parse_int(full, value);
        else if (key == "max_points_per_set") a.max_points_per_set = parse_int(full, value);
        else if (key == "dense_n_x") a.dense_n_x = parse_int(full, value);
        else if (key == "dense_n_t") a.dense_n_t = parse_int(full, value);
        else throw ConfigError("unknown key '" + full + "'");
        return;
    }
    if (section == "schedule") {
        TrainingSchedule& s = m.schedule;
        if (key == "hidden_layers") s.hidden_layers = parse_int(full, value);
        else if (key == "hidden_width") s.hidden_width = parse_int(full, value);
        else if (key == "fixed_grid_n") s.fixed_grid_n = parse_int(full, value);
        else if (key == "adaptive_grid_n") s.adaptive_grid_n = parse_int(full, value);
        else if (key == "bc_points_per_edge") s.bc_points_per_edge = parse_int(full, value);
        else if (key == "bfgs_max_iterations") s.bfgs_max_iterations = parse_int(full, value);
        else if (key == "bfgs_memory") s.bfgs_memory = parse_int(full, value);
        else if (key == "adam_log_every") s.adam_log_every = parse_int(full, value);
        else if (key == "test_interior_points") s.test_interior_points = parse_int(full, value);
        else if (key == "test_bc_points_per_edge")
            s.test_bc_points_per_edge = parse_int(full, value);
        else if (key == "bfgs_gradient_tolerance")
            s.bfgs_gradient_tolerance = parse_double(full, value);
        else throw ConfigError("unknown key '" + full + "'");
        return;
    }
    throw ConfigError("unknown section '[" + section + "]'");
}

} // namespace

void RunManifest::validate() const {
    const ProblemConfig& p = problem;
    if (!(p.l > 0)) throw ConfigError("problem.l: must be > 0");
    if (!(p.T > 0)) throw ConfigError("problem.T: must be > 0");
    if (!(p.k > 0)) throw ConfigError("problem.k: must be > 0");
    if (!(p.mu1 > 0)) throw ConfigError("problem.mu1: must be > 0");
    if (!(p.mu2 > 0)) throw ConfigError("problem.mu2: must be > 0");
    if (!(p.p_in > p.p_out)) throw ConfigError("problem.p_in: must exceed problem.p_out");

    if (!weights.valid()) {
        throw ConfigError("weights: all lambda values must be >= 0");
    }
    if (!(adam.learning_rate > 0)) throw ConfigError("adam.learning_rate: must be > 0");
    if (!(adam.beta1 >= 0 && adam.beta1 < 1)) throw ConfigError("adam.beta1: must be in [0,1)");
    if (!(adam.beta2 >= 0 && adam.beta2 < 1)) throw ConfigError("adam.beta2: must be in [0,1)");
    if (!(adam.epsilon > 0)) throw ConfigError("adam.epsilon: must be > 0");
    if (adam.iterations < 0) throw ConfigError("adam.iterations: must be >= 0");

    if (mode == RunMode::Adaptive && !adaptivity.valid()) {
        throw ConfigError("adaptivity: invalid configuration for adaptive mode");
    }
    if (!schedule.valid()) {
        throw ConfigError("schedule: invalid configuration");
    }
    if (output_dir.empty()) {
        throw ConfigError("output_dir: must not be empty");
    }
}

RunManifest parse_manifest(const std::string& text, const std::string& origin) {
    RunManifest manifest;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::size_t comment = line.find('#');
        if (comment != std::string::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                std::ostringstream msg;
                msg << origin << ":" << line_number << ": malformed section header '" << line
                    << "'";
                throw ConfigError(msg.str());
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << origin << ":" << line_number << ": expected 'key = value', got '" << line
                << "'";
            throw ConfigError(msg.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream msg;
            msg << origin << ":" << line_number << ": empty key";
            throw ConfigError(msg.str());
        }
        apply_key(manifest, section, key, value);
    }
    manifest.validate();
    return manifest;
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("load_manifest: cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str(), path);
}

std::string manifest_to_text(const RunManifest& m) {
    std::ostringstream out;
    const auto d = [](double v) { return format_double(v); };
    out << "mode = " << to_string(m.mode) << "\n";
    out << "seed = " << m.seed << "\n";
    out << "output_dir = " << m.output_dir << "\n";
    out << "\n[problem]\n";
    out << "l = " << d(m.problem.l) << "\n";
    out << "T = " << d(m.problem.T) << "\n";
    out << "k = " << d(m.problem.k) << "\n";
    out << "mu1 = " << d(m.problem.mu1) << "\n";
    out << "mu2 = " << d(m.problem.mu2) << "\n";
    out << "p_in = " << d(m.problem.p_in) << "\n";
    out << "p_out = " << d(m.problem.p_out) << "\n";
    out << "\n[weights]\n";
    out << "lambda_v = " << d(m.weights.lambda_v) << "\n";
    out << "lambda_c = " << d(m.weights.lambda_c) << "\n";
    out << "lambda_p = " << d(m.weights.lambda_p) << "\n";
    out << "lambda_1 = " << d(m.weights.lambda_1) << "\n";
    out << "lambda_2 = " << d(m.weights.lambda_2) << "\n";
    out << "lambda_3 = " << d(m.weights.lambda_3) << "\n";
    out << "\n[adam]\n";
    out << "learning_rate = " << d(m.adam.learning_rate) << "\n";
    out << "beta1 = " << d(m.adam.beta1) << "\n";
    out << "beta2 = " << d(m.adam.beta2) << "\n";
    out << "epsilon = " << d(m.adam.epsilon) << "\n";
    out << "iterations = " << m.adam.iterations << "\n";
    out << "\n[adaptivity]\n";
    out << "max_steps = " << m.adaptivity.max_steps << "\n";
    out << "iterations_per_step = " << m.adaptivity.iterations_per_step << "\n";
    out << "eps_f1 = " << d(m.adaptivity.eps_f1) << "\n";
    out << "eps_f2 = " << d(m.adaptivity.eps_f2) << "\n";
    out << "eps_f3 = " << d(m.adaptivity.eps_f3) << "\n";
    out << "eps_v = " << d(m.adaptivity.eps_v) << "\n";
    out << "eps_c = " << d(m.adaptivity.eps_c) << "\n";
    out << "eps_p = " << d(m.adaptivity.eps_p) << "\n";
    out << "filter_epsilon = " << d(m.adaptivity.filter_epsilon) << "\n";
    out << "points_per_step = " << m.adaptivity.points_per_step << "\n";
    out << "max_points_per_set = " << m.adaptivity.max_points_per_set << "\n";
    out << "dense_n_x = " << m.adaptivity.dense_n_x << "\n";
    out << "dense_n_t = " << m.adaptivity.dense_n_t << "\n";
    out << "\n[schedule]\n";
    out << "hidden_layers = " << m.schedule.hidden_layers << "\n";
    out << "hidden_width = " << m.schedule.hidden_width << "\n";
    out << "fixed_grid_n = " << m.schedule.fixed_grid_n << "\n";
    out << "adaptive_grid_n = " << m.schedule.adaptive_grid_n << "\n";
    out << "bc_points_per_edge = " << m.schedule.bc_points_per_edge << "\n";
    out << "bfgs_max_iterations = " << m.schedule.bfgs_max_iterations << "\n";
    out << "bfgs_memory = " << m.schedule.bfgs_memory << "\n";
    out << "adam_log_every = " << m.schedule.adam_log_every << "\n";
    out << "test_interior_points = " << m.schedule.test_interior_points << "\n";
    out << "test_bc_points_per_edge = " << m.schedule.test_bc_points_per_edge << "\n";
    out << "bfgs_gradient_tolerance = " << d(m.schedule.bfgs_gradient_tolerance) << "\n";
    return out.str();
}

} // namespace pinnflow
