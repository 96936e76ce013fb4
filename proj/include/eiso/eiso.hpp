#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eiso/empirical.hpp"
#include "eiso/sparse.hpp"

namespace eiso {

struct EisoParams {
    double alpha = 1e-6;   // sparsity weight of the reconstruction program
    double beta = 1e-3;    // elementwise reconstruction tolerance
    double sigma0 = 1e-7;  // singular-value truncation threshold
    int max_iterations = 200;  // guard on the selection loop
    SolverOptions solver;
};

struct TruncatedMeasures {
    std::vector<double> retained_singular_values;  // descending, all >= sigma0
    double kappa_squared = 1.0;                    // (max/min retained)^2
};

/// Rank-truncated spectral measure of a row subset: singular values >= sigma0
/// are retained and kappa^2 is their squared max/min ratio. Returns nullopt
/// when no singular value meets sigma0 (a numerically information-free
/// subset; callers treat this as a failed iteration).
std::optional<TruncatedMeasures> truncated_measures(const Matrix& subset, double sigma0);

struct IterationRecord {
    int iteration = 0;                   // 1-based selection-loop index
    std::vector<int> new_rows;           // selected this iteration (original row indices)
    std::vector<int> cumulative_rows;    // all rows selected through this iteration
    std::vector<double> retained_singular_values;
    double kappa_squared = 1.0;
};

struct EisoResult {
    std::vector<int> target_states;
    std::vector<IterationRecord> iterations;
    double kappa_min = 0.0;   // min over iterations of kappa_squared; +inf if none
    bool observable = false;  // kappa_min finite
};

/// Iterated sparse row selection: repeatedly solves the reconstruction
/// program on the not-yet-selected rows, prunes the support, scores the
/// cumulative selection with truncated_measures, and removes the selected
/// rows, until the program becomes infeasible (or rows/iterations run out).
/// kappa_min is the best score over all iterations, +inf if no iteration
/// produced one. Row indices in the records refer to M's original rows, so
/// row_meta can attribute them to sensors and time steps.
EisoResult run(const EmpiricalObservabilityMatrix& M, const std::vector<int>& targets,
               const EisoParams& params = {});
EisoResult run(const EmpiricalObservabilityMatrix& M, int target, const EisoParams& params = {});

/// Multi-state extension: identical to run with z >= 2 stacked targets.
EisoResult run_multi(const EmpiricalObservabilityMatrix& M, const std::vector<int>& targets,
                     const EisoParams& params = {});

/// Analytical baseline: state j is observable iff appending e_j to the
/// columns of M^T leaves the numerical rank unchanged. Rank counts singular
/// values >= sigma0 * sigma_max of the matrix at hand (relative threshold,
/// since the appended basis column has unit norm regardless of scale).
bool rank_augmentation_check(const Matrix& entries, int state_index, double sigma0);
bool rank_augmentation_check(const EmpiricalObservabilityMatrix& M, int state_index, double sigma0);

/// Number of nonempty row subsets of a `rows`-row matrix, 2^rows - 1,
/// as an exact decimal string.
std::string combination_count(int rows);

struct OracleResult {
    double best_kappa_squared = 0.0;  // +inf when no admissible subset exists
    std::vector<int> best_subset;
    bool feasible = false;
};

/// Brute-force reference: enumerates every nonempty row subset, admits those
/// whose minimum-norm least-squares reconstruction meets beta elementwise,
/// and returns the smallest truncated kappa^2 among them. Guarded by
/// max_rows; intended for tests.
OracleResult exhaustive_oracle(const Matrix& entries, const Matrix& target, double beta,
                               double sigma0, int max_rows = 20);

}  // namespace eiso
