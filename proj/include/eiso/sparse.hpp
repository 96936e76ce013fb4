#pragma once

#include <vector>

#include "eiso/system.hpp"

namespace eiso {

/// One instance of the row-selection program: find a sparse coefficient
/// matrix v (z x q) so that matrix^T v^T reconstructs every target column
/// within an elementwise tolerance beta, with an l1 penalty alpha promoting
/// sparsity in v.
struct ReconstructionProblem {
    Matrix matrix;  // q x n candidate observability matrix
    Matrix target;  // n x z stacked distinct basis vectors (z = 1 for a single state)
    double alpha = 1e-6;
    double beta = 1e-3;
};

struct SparseSolution {
    bool feasible = false;
    std::vector<int> support;   // sorted row indices with nonzero coefficients
    Matrix coefficients;        // z x q; entries outside the support exactly zero
    double residual_inf = 0.0;  // max entry of |target - matrix^T coefficients^T|
};

struct SolverOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    int max_iterations = 50000;
    double zero_threshold = 1e-12;  // relative to the largest coefficient magnitude
    /// State dimension up to which feasibility is certified exactly by the
    /// Chebyshev-distance subproblem (cost grows combinatorially with n).
    int certificate_max_states = 12;
};

/// Minimizes sum_c ||target_c - matrix^T v_c^T||_2 + alpha * ||v||_1 subject
/// to |target - matrix^T v^T| <= beta elementwise, via ADMM with an exact
/// feasibility certificate. feasible = false means the constraint set is
/// empty: the target cannot be reconstructed from the rows to tolerance
/// beta. Throws SolverError if the iteration budget is exhausted without
/// convergence (distinct from infeasibility). Requires beta in (0, 1).
SparseSolution solve(const ReconstructionProblem& problem, const SolverOptions& opts = {});

/// Greedy support reduction: visits rows by descending raw coefficient
/// magnitude (max across target columns; ties by ascending row index),
/// re-fitting coefficients on the current support by minimum-norm least
/// squares after each addition, and stops once the elementwise residual
/// meets beta. Returns feasible = false if even the full raw support cannot
/// meet beta under re-fitting.
SparseSolution prune(const ReconstructionProblem& problem, const SparseSolution& raw);

/// Exact min over c of ||b - basis*c||_inf (distance from b to the column
/// span of basis), solved as a tiny Chebyshev LP by vertex enumeration.
/// Intended for small dimensions; cost is combinatorial in basis.cols().
double chebyshev_distance(const Matrix& basis, const Vector& b);

}  // namespace eiso
