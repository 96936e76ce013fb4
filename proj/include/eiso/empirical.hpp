#pragma once

#include <string>
#include <vector>

#include "eiso/system.hpp"

namespace eiso {

/// Provenance of one matrix row: which output at which window step.
struct RowMeta {
    int time_index = 0;    // 0 .. w-1
    int output_index = 0;  // 0 .. p-1
};

/// The (w*p) x n central-difference observability matrix of a single window.
/// Row ordering is time-major, output-minor: row k*p + s holds output s at
/// window step k. Immutable after construction.
struct EmpiricalObservabilityMatrix {
    Matrix entries;
    std::vector<RowMeta> row_meta;
    double epsilon = 0.0;
    double dt = 0.0;
    Vector x0;  // anchor state of the window

    int rows() const { return static_cast<int>(entries.rows()); }
    int states() const { return static_cast<int>(entries.cols()); }

    /// Wraps a raw matrix (p = 1 per row) so Gramian-level measures and the
    /// selection algorithms can run on hand-built fixtures.
    static EmpiricalObservabilityMatrix from_entries(Matrix entries, double dt, double epsilon = 0.0);
};

struct GramianMeasures {
    Matrix gramian;                             // entries^T entries * dt
    double unobservability_index = 0.0;         // 1 / lambda_min, +inf if rank-deficient
    double estimation_condition_number = 1.0;   // lambda_max / lambda_min, +inf if rank-deficient
};

/// Output sequence of the simulation started at x0 + sign*epsilon*e_j.
/// state_index is 0-based; sign must be +1 or -1.
std::vector<Vector> perturbed_outputs(const SystemModel& system, const Vector& x0,
                                      const InputSchedule& inputs, int state_index,
                                      int sign, double epsilon, int samples);

/// Builds the w-step matrix from 2n perturbed simulations. Output components
/// marked Angular have their central difference wrapped into (-pi, pi]
/// before division by 2*epsilon. The 2n simulations run in parallel
/// (`threads` as in resolve_threads); output is identical to the serial
/// reference for any thread count.
EmpiricalObservabilityMatrix build_matrix(const SystemModel& system, const Vector& x0,
                                          const InputSchedule& inputs, int w, double epsilon,
                                          int threads = 0);

/// One matrix per anchor t = 0 .. samples-w (stride 1). Each window is
/// re-anchored at the nominal state x(t) and uses the global schedule
/// restricted to steps [t, t+w-2]. Parallel across windows.
std::vector<EmpiricalObservabilityMatrix> sliding_windows(const SystemModel& system,
                                                          const Trajectory& nominal,
                                                          const InputSchedule& inputs, int w,
                                                          double epsilon, int threads = 0);

namespace ref {
/// Serial reference implementations, kept for testing and benchmarking the
/// parallel kernels against.
EmpiricalObservabilityMatrix build_matrix(const SystemModel& system, const Vector& x0,
                                          const InputSchedule& inputs, int w, double epsilon);
std::vector<EmpiricalObservabilityMatrix> sliding_windows(const SystemModel& system,
                                                          const Trajectory& nominal,
                                                          const InputSchedule& inputs, int w,
                                                          double epsilon);
}  // namespace ref

/// Gramian approximation entries^T entries * dt and its spectral measures.
/// Eigenvalues below sigma0^2 are treated as numerically zero, in which case
/// both measures are +inf.
GramianMeasures empirical_gramian(const EmpiricalObservabilityMatrix& M, double sigma0 = 1e-6);

/// Writes `<base>.csv` (entries, row-major) and `<base>.meta.csv`
/// (row, time_index, output_index sidecar).
void save_csv(const EmpiricalObservabilityMatrix& M, const std::string& base_path);

}  // namespace eiso
