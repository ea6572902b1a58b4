#include "pinnflow/experiment.hpp"

#include "pinnflow/analytic.hpp"
#include "pinnflow/csv.hpp"
#include "pinnflow/parallel.hpp"
#include "pinnflow/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace pinnflow {

namespace {

namespace fs = std::filesystem;

std::string event_file_name(int event_index) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "collocation_event_%03d.csv", event_index);
    return buf;
}

void write_collocation_snapshot(const std::string& path, const PointSets& sets,
                                const EnrichmentLog& log) {
    CsvTable table;
    table.header = {"set_name", "x", "t", "is_new"};

    const auto contains = [](const auto& added, double x, double t) {
        for (const auto& q : added) {
            double qx, qt;
            if constexpr (requires { q.x; }) {
                qx = q.x;
                qt = q.t;
            } else {
                qx = q[0];
                qt = q[1];
            }
            if (qx == x && qt == t) {
                return true;
            }
        }
        return false;
    };

    const auto emit = [&](const std::string& name, double x, double t, bool is_new) {
        table.add_row({name, format_double(x), format_double(t), is_new ? "1" : "0"});
    };
    for (const auto& q : sets.f1_points) {
        emit("f1", q[0], q[1], contains(log.added_f1, q[0], q[1]));
    }
    for (const auto& q : sets.f2_points) {
        emit("f2", q[0], q[1], contains(log.added_f2, q[0], q[1]));
    }
    for (const auto& q : sets.f3_points) {
        emit("f3", q[0], q[1], contains(log.added_f3, q[0], q[1]));
    }
    for (const auto& q : sets.c_bc_points) {
        emit("c_bc", q.x, q.t, contains(log.added_c, q.x, q.t));
    }
    for (const auto& q : sets.p_bc_points) {
        emit("p_bc", q.x, q.t, contains(log.added_p, q.x, q.t));
    }
    write_csv(path, table);
}

void write_cost_history(const std::string& path, const std::vector<TrainRecord>& records) {
    CsvTable table;
    table.header = {"iteration", "phase",   "train_cost", "test_cost", "cost_f1", "cost_f2",
                    "cost_f3",   "cost_c",  "cost_p",     "n_f1",      "n_f2",    "n_f3"};
    for (const auto& rec : records) {
        table.add_row({std::to_string(rec.iteration),
                       rec.phase == TrainPhase::Adam ? "adam" : "bfgs",
                       format_double(rec.train_cost), format_double(rec.test_cost),
                       format_double(rec.components.cost_f1), format_double(rec.components.cost_f2),
                       format_double(rec.components.cost_f3), format_double(rec.components.cost_c),
                       format_double(rec.components.cost_p), std::to_string(rec.n_f1),
                       std::to_string(rec.n_f2), std::to_string(rec.n_f3)});
    }
    write_csv(path, table);
}

void write_front_csv(const std::string& path, const FieldTriple& triple,
                     const ProblemConfig& cfg) {
    CsvTable table;
    table.header = {"t", "x_f_model", "x_f_analytic"};
    for (int i = 0; i < kProfileSamples; ++i) {
        const double t = cfg.T * i / (kProfileSamples - 1);
        const auto model = front_from_model(triple.c, t, cfg);
        table.add_row({format_double(t),
                       model ? format_double(*model) : std::string("nan"),
                       format_double(front_position(t, cfg))});
    }
    write_csv(path, table);
}

void write_pressure_csv(const std::string& path, const FieldTriple& triple,
                        const ProblemConfig& cfg) {
    CsvTable table;
    table.header = {"t_snapshot", "x", "p_model", "p_analytic"};
    Workspace ws;
    for (double fraction : kPressureSnapshotFractions) {
        const double t = fraction * cfg.T;
        for (int i = 0; i < kProfileSamples; ++i) {
            const double x = cfg.l * i / (kProfileSamples - 1);
            table.add_row({format_double(t), format_double(x),
                           format_double(forward_scalar(triple.p, x, t, ws)),
                           format_double(pressure_exact(x, t, cfg))});
        }
    }
    write_csv(path, table);
}

void compute_errors(ErrorReport& report, const FieldTriple& triple, const ProblemConfig& cfg) {
    // Front errors over the interior time window, only where the analytic
    // front is still inside the domain. A missing model front counts as the
    // worst case, one full domain length.
    const double t_lo = kFrontErrorTimeFractionLo * cfg.T;
    const double t_hi = kFrontErrorTimeFractionHi * cfg.T;
    double linf = 0.0;
    double sum_sq = 0.0;
    int count = 0;
    for (int i = 0; i < kFrontErrorSamples; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / (kFrontErrorSamples - 1);
        const double exact = front_position(t, cfg);
        if (exact > cfg.l) {
            continue;
        }
        const auto model = front_from_model(triple.c, t, cfg);
        const double err = model ? std::abs(*model - exact) : cfg.l;
        linf = std::max(linf, err);
        sum_sq += err * err;
        ++count;
    }
    report.front_linf_error = linf;
    report.front_l2_error = count > 0 ? std::sqrt(sum_sq / count) : 0.0;

    Workspace ws;
    double p_sum_sq = 0.0;
    int p_count = 0;
    for (double fraction : kPressureSnapshotFractions) {
        const double t = fraction * cfg.T;
        for (int i = 0; i < kProfileSamples; ++i) {
            const double x = cfg.l * i / (kProfileSamples - 1);
            const double err = forward_scalar(triple.p, x, t, ws) - pressure_exact(x, t, cfg);
            p_sum_sq += err * err;
            ++p_count;
        }
    }
    report.pressure_l2_error = std::sqrt(p_sum_sq / p_count);
}

} // namespace

std::vector<std::string> expected_run_files(RunMode mode, int enrichment_events) {
    std::vector<std::string> files = {"cost_history.csv", "front.csv", "pressure.csv",
                                      "report.txt"};
    if (mode == RunMode::Adaptive) {
        for (int e = 0; e < enrichment_events; ++e) {
            files.push_back(event_file_name(e));
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

ErrorReport run_experiment(const RunManifest& manifest) {
    manifest.validate();
    fs::create_directories(manifest.output_dir);
    const auto path_in_out = [&](const std::string& name) {
        return (fs::path(manifest.output_dir) / name).string();
    };

    TrainOptions options;
    options.threads = default_thread_count();
    int events = 0;
    if (manifest.mode == RunMode::Adaptive) {
        options.on_enrichment = [&](int event_index, int /*bfgs_iteration*/,
                                    const PointSets& sets, const EnrichmentLog& log) {
            write_collocation_snapshot(path_in_out(event_file_name(event_index)), sets, log);
            events = event_index + 1;
        };
    }

    const TrainResult result =
        manifest.mode == RunMode::Fixed
            ? train_fixed(manifest.problem, manifest.weights, manifest.adam, manifest.schedule,
                          manifest.seed, options)
            : train_adaptive(manifest.problem, manifest.weights, manifest.adam,
                             manifest.adaptivity, manifest.schedule, manifest.seed, options);

    ErrorReport report;
    report.mode = manifest.mode;
    report.seed = manifest.seed;
    report.status = result.status;
    report.problem = manifest.problem;
    report.wall_seconds = result.wall_seconds;
    report.enrichment_events = events;
    if (!result.records.empty()) {
        report.final_train_cost = result.records.back().train_cost;
        report.final_test_cost = result.records.back().test_cost;
        report.generalization_gap =
            std::abs(report.final_train_cost - report.final_test_cost);
    }

    write_cost_history(path_in_out("cost_history.csv"), result.records);
    if (result.status == TrainStatus::Completed) {
        write_front_csv(path_in_out("front.csv"), result.triple, manifest.problem);
        write_pressure_csv(path_in_out("pressure.csv"), result.triple, manifest.problem);
        compute_errors(report, result.triple, manifest.problem);
    }
    write_report(path_in_out("report.txt"), report);
    return report;
}

void write_report(const std::string& path, const ErrorReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("write_report: cannot open " + path);
    }
    out << "mode = " << to_string(report.mode) << "\n";
    out << "seed = " << report.seed << "\n";
    out << "status = " << (report.status == TrainStatus::Completed ? "completed" : "diverged")
        << "\n";
    out << "front_linf_error = " << format_double(report.front_linf_error) << "\n";
    out << "front_l2_error = " << format_double(report.front_l2_error) << "\n";
    out << "pressure_l2_error = " << format_double(report.pressure_l2_error) << "\n";
    out << "final_train_cost = " << format_double(report.final_train_cost) << "\n";
    out << "final_test_cost = " << format_double(report.final_test_cost) << "\n";
    out << "generalization_gap = " << format_double(report.generalization_gap) << "\n";
    out << "wall_seconds = " << format_double(report.wall_seconds) << "\n";
    out << "enrichment_events = " << report.enrichment_events << "\n";
    out << "problem.l = " << format_double(report.problem.l) << "\n";
    out << "problem.T = " << format_double(report.problem.T) << "\n";
    out << "problem.k = " << format_double(report.problem.k) << "\n";
    out << "problem.mu1 = " << format_double(report.problem.mu1) << "\n";
    out << "problem.mu2 = " << format_double(report.problem.mu2) << "\n";
    out << "problem.p_in = " << format_double(report.problem.p_in) << "\n";
    out << "problem.p_out = " << format_double(report.problem.p_out) << "\n";
}

ErrorReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("read_report: cannot open " + path);
    }
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    const auto get = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw ConfigError("read_report: missing key '" + key + "' in " + path);
        }
        return it->second;
    };
    ErrorReport report;
    report.mode = run_mode_from_string(get("mode"));
    report.seed = std::stoull(get("seed"));
    report.status =
        get("status") == "completed" ? TrainStatus::Completed : TrainStatus::Diverged;
    report.front_linf_error = std::strtod(get("front_linf_error").c_str(), nullptr);
    report.front_l2_error = std::strtod(get("front_l2_error").c_str(), nullptr);
    report.pressure_l2_error = std::strtod(get("pressure_l2_error").c_str(), nullptr);
    report.final_train_cost = std::strtod(get("final_train_cost").c_str(), nullptr);
    report.final_test_cost = std::strtod(get("final_test_cost").c_str(), nullptr);
    report.generalization_gap = std::strtod(get("generalization_gap").c_str(), nullptr);
    report.wall_seconds = std::strtod(get("wall_seconds").c_str(), nullptr);
    report.enrichment_events = std::stoi(get("enrichment_events"));
    report.problem.l = std::strtod(get("problem.l").c_str(), nullptr);
    report.problem.T = std::strtod(get("problem.T").c_str(), nullptr);
    report.problem.k = std::strtod(get("problem.k").c_str(), nullptr);
    report.problem.mu1 = std::strtod(get("problem.mu1").c_str(), nullptr);
    report.problem.mu2 = std::strtod(get("problem.mu2").c_str(), nullptr);
    report.problem.p_in = std::strtod(get("problem.p_in").c_str(), nullptr);
    report.problem.p_out = std::strtod(get("problem.p_out").c_str(), nullptr);
    return report;
}

ComparisonSummary compare_runs(const ErrorReport& a, const ErrorReport& b) {
    const bool same_problem = a.problem.l == b.problem.l && a.problem.T == b.problem.T &&
                              a.problem.k == b.problem.k && a.problem.mu1 == b.problem.mu1 &&
                              a.problem.mu2 == b.problem.mu2 && a.problem.p_in == b.problem.p_in &&
                              a.problem.p_out == b.problem.p_out;
    if (!same_problem) {
        throw ConfigError("compare_runs: reports come from different problem configurations");
    }

    ComparisonSummary summary;
    const auto add = [&](const std::string& metric, double va, double vb) {
        ComparisonRow row{metric, va, vb, 0};
        if (va < vb) {
            row.winner = 1;
            ++summary.wins_a;
        } else if (vb < va) {
            row.winner = 2;
            ++summary.wins_b;
        }
        summary.rows.push_back(row);
    };
    add("front_linf_error", a.front_linf_error, b.front_linf_error);
    add("front_l2_error", a.front_l2_error, b.front_l2_error);
    add("pressure_l2_error", a.pressure_l2_error, b.pressure_l2_error);
    add("final_train_cost", a.final_train_cost, b.final_train_cost);
    add("final_test_cost", a.final_test_cost, b.final_test_cost);
    add("generalization_gap", a.generalization_gap, b.generalization_gap);
    add("wall_seconds", a.wall_seconds, b.wall_seconds);
    return summary;
}

void print_comparison(std::ostream& out, const ComparisonSummary& summary,
                      const std::string& label_a, const std::string& label_b) {
    out << std::left << std::setw(22) << "metric" << std::right << std::setw(16) << label_a
        << std::setw(16) << label_b << "  winner\n";
    for (const auto& row : summary.rows) {
        out << std::left << std::setw(22) << row.metric << std::right << std::setw(16)
            << format_double(row.value_a) << std::setw(16) << format_double(row.value_b) << "  "
            << (row.winner == 0 ? "-" : row.winner == 1 ? label_a : label_b) << "\n";
    }
    out << "wins: " << label_a << "=" << summary.wins_a << " " << label_b << "="
        << summary.wins_b << "\n";
}

void export_oracle(const ProblemConfig& cfg, const std::string& out_dir) {
    if (!cfg.valid()) {
        throw ConfigError("export_oracle: invalid problem configuration");
    }
    fs::create_directories(out_dir);

    CsvTable front;
    front.header = {"t", "x_f_analytic"};
    for (int i = 0; i < kProfileSamples; ++i) {
        const double t = cfg.T * i / (kProfileSamples - 1);
        front.add_row({format_double(t), format_double(front_position(t, cfg))});
    }
    write_csv((fs::path(out_dir) / "front_analytic.csv").string(), front);

    CsvTable pressure;
    pressure.header = {"t_snapshot", "x", "p_analytic"};
    for (double fraction : kPressureSnapshotFractions) {
        const double t = fraction * cfg.T;
        for (int i = 0; i < kProfileSamples; ++i) {
            const double x = cfg.l * i / (kProfileSamples - 1);
            pressure.add_row(
                {format_double(t), format_double(x), format_double(pressure_exact(x, t, cfg))});
        }
    }
    write_csv((fs::path(out_dir) / "pressure_analytic.csv").string(), pressure);
}

} // namespace pinnflow
