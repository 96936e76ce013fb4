#pragma once

#include <string>
#include <vector>

#include "eiso/eiso.hpp"

namespace eiso {

struct InputSegment {
    Vector value;
    double duration = 0.0;  // seconds; expands to round(duration/dt) steps
};

struct SensorSet {
    std::string name;
    Matrix C;
};

/// Declarative description of one experiment, loaded from a JSON config file
/// (schema documented in the README). Indices are 0-based throughout.
struct ExperimentConfig {
    bool use_fly_model = false;
    Matrix A, C;  // inline linear system when use_fly_model is false
    TimeKind time_kind = TimeKind::ContinuousTime;

    double dt = 0.0;
    double duration = 0.0;  // trajectory covers [0, duration): round(duration/dt) samples
    Vector x0;
    std::vector<InputSegment> input_schedule;  // empty = zero input

    int window = 1;
    double epsilon = 1e-3;
    EisoParams eiso;

    std::vector<std::vector<int>> targets;          // defaults to all singletons
    std::vector<std::vector<int>> sensor_subsets;   // empty = single subset of all outputs
    std::vector<double> output_scales;              // empty = all ones

    std::vector<SensorSet> sensor_sets;  // only used by the sensor study

    /// Parses and validates; throws std::invalid_argument naming the
    /// offending field.
    static ExperimentConfig load(const std::string& path);

    SystemModel make_system() const;
    int samples() const;
    /// Per-step input sequence covering samples-1 steps.
    InputSchedule make_schedule() const;
};

struct WindowResult {
    int anchor_index = 0;
    double anchor_time = 0.0;
    int subset_id = 0;  // index into ExperimentReport::sensor_subsets
    std::vector<int> target_set;
    double kappa_min = 0.0;
    bool observable = false;
    int iterations_used = 0;
    /// Provenance of the selection attaining kappa_min (empty if unobservable).
    std::vector<RowMeta> rows_used;
};

struct WindowGramian {
    int anchor_index = 0;
    int subset_id = 0;
    double estimation_condition_number = 0.0;
    double unobservability_index = 0.0;
};

struct IterationTrace {
    int anchor_index = 0;
    int subset_id = 0;
    std::vector<int> target_set;
    int iteration = 0;
    double kappa_squared = 0.0;
    std::vector<RowMeta> new_rows;
    int retained_count = 0;
};

struct ExperimentReport {
    std::vector<std::vector<int>> sensor_subsets;
    std::vector<WindowResult> per_window;       // window-major, then subset, then target
    std::vector<WindowGramian> gramian_summary;
    std::vector<IterationTrace> iterations;
};

/// Simulates the nominal trajectory, builds sliding-window matrices,
/// restricts rows to each sensor subset, and runs the selection per target
/// set per window. The (window x subset x target) grid executes in parallel;
/// the report is identical to the serial reference for any thread count.
/// Numerical failures are rethrown with the offending window identified.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads = 0);

struct SensorSetResult {
    int set_id = 0;
    std::string name;
    double gramian_condition_number = 0.0;
    std::vector<double> kappa_min;  // per state
    std::vector<bool> observable;
};

struct SensorStudyReport {
    std::vector<SensorSetResult> sets;
    /// R^2 of log10(gramian condition number) vs log10(worst per-state
    /// kappa_min) over the sets where both are finite.
    double log_log_r_squared = 0.0;
    int regression_points = 0;
};

/// Evaluates every configured sensor set (C matrix) on the configured
/// dynamics over a single window anchored at x0: Gramian condition number
/// plus per-state kappa_min, and the log-log correlation between them.
SensorStudyReport sensor_selection_study(const ExperimentConfig& cfg, int threads = 0);

namespace ref {
/// Serial reference implementations of the experiment grids.
ExperimentReport run_experiment(const ExperimentConfig& cfg);
SensorStudyReport sensor_selection_study(const ExperimentConfig& cfg);
}  // namespace ref

/// Writes windows.csv, iterations.csv and report.json under out_dir.
/// Floats are printed with 12 significant digits; infinities as "inf".
void emit_plot_data(const ExperimentReport& report, const std::string& out_dir);
/// Writes sensors.csv and report.json under out_dir.
void emit_plot_data(const SensorStudyReport& report, const std::string& out_dir);

}  // namespace eiso
