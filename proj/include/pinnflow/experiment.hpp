#pragma once

#include "pinnflow/manifest.hpp"
#include "pinnflow/training.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pinnflow {

/// Error metrics of one finished run against the closed-form solution.
struct ErrorReport {
    RunMode mode = RunMode::Fixed;
    std::uint64_t seed = 0;
    TrainStatus status = TrainStatus::Completed;
    ProblemConfig problem;
    double front_linf_error = 0.0;
    double front_l2_error = 0.0;
    double pressure_l2_error = 0.0;
    double final_train_cost = 0.0;
    double final_test_cost = 0.0;
    double generalization_gap = 0.0;
    double wall_seconds = 0.0;
    int enrichment_events = 0;
};

/// Time window used for the front error metrics.
inline constexpr double kFrontErrorTimeFractionLo = 0.1; ///< of T
inline constexpr double kFrontErrorTimeFractionHi = 0.9; ///< of T
inline constexpr int kFrontErrorSamples = 81;

/// Times (as fractions of T) at which pressure profiles are exported.
inline constexpr double kPressureSnapshotFractions[] = {0.2, 0.4, 0.6, 0.8};
inline constexpr int kProfileSamples = 101;

/// Trains per the manifest and writes the run artifacts into
/// manifest.output_dir: cost_history.csv, front.csv, pressure.csv,
/// report.txt, and (adaptive mode) collocation_event_NNN.csv per enrichment
/// event. Returns the error report; a diverged run still writes its partial
/// artifacts and reports status accordingly.
ErrorReport run_experiment(const RunManifest& manifest);

/// Declared artifact file names for a finished run (sorted).
std::vector<std::string> expected_run_files(RunMode mode, int enrichment_events);

void write_report(const std::string& path, const ErrorReport& report);
ErrorReport read_report(const std::string& path);

/// One row of the side-by-side comparison.
struct ComparisonRow {
    std::string metric;
    double value_a = 0.0;
    double value_b = 0.0;
    int winner = 0; ///< 0 tie, 1 run A, 2 run B (smaller value wins)
};

struct ComparisonSummary {
    std::vector<ComparisonRow> rows;
    int wins_a = 0;
    int wins_b = 0;
};

/// Side-by-side metric comparison. Throws ConfigError when the two reports
/// come from different problem configurations.
ComparisonSummary compare_runs(const ErrorReport& a, const ErrorReport& b);

void print_comparison(std::ostream& out, const ComparisonSummary& summary,
                      const std::string& label_a, const std::string& label_b);

/// Writes the analytic front trajectory and pressure profiles only.
void export_oracle(const ProblemConfig& cfg, const std::string& out_dir);

} // namespace pinnflow
