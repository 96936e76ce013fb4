#include "eiso/sparse.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eiso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_problem(const ReconstructionProblem& problem) {
    const Matrix& O = problem.matrix;
    const Matrix& B = problem.target;
    if (O.rows() < 1 || O.cols() < 1) throw std::invalid_argument("solve: matrix must be nonempty");
    if (!O.allFinite()) throw std::invalid_argument("solve: matrix must be finite");
    if (B.rows() != O.cols())
        throw std::invalid_argument("solve: target has " + std::to_string(B.rows()) +
                                    " rows, expected " + std::to_string(O.cols()));
    if (B.cols() < 1) throw std::invalid_argument("solve: target must have at least one column");
    if (problem.alpha < 0.0) throw std::invalid_argument("solve: alpha must be nonnegative");
    if (!(problem.beta > 0.0) || problem.beta >= 1.0)
        throw std::invalid_argument("solve: beta must lie in (0, 1)");
    if (O.cwiseAbs().rowwise().maxCoeff().maxCoeff() == 0.0)
        throw std::invalid_argument("solve: matrix must have at least one nonzero row");

    std::vector<int> hot_indices;
    for (int c = 0; c < B.cols(); ++c) {
        int hot = -1;
        for (int i = 0; i < B.rows(); ++i) {
            const double v = B(i, c);
            if (v == 1.0 && hot < 0) {
                hot = i;
            } else if (v != 0.0) {
                throw std::invalid_argument("solve: target columns must be canonical basis vectors");
            }
        }
        if (hot < 0) throw std::invalid_argument("solve: target columns must be canonical basis vectors");
        hot_indices.push_back(hot);
    }
    std::sort(hot_indices.begin(), hot_indices.end());
    if (std::adjacent_find(hot_indices.begin(), hot_indices.end()) != hot_indices.end())
        throw std::invalid_argument("solve: target columns must be pairwise distinct");
}

Matrix soft_threshold(const Matrix& v, double kappa) {
    if (kappa <= 0.0) return v;
    return v.unaryExpr([kappa](double x) {
        const double m = std::abs(x) - kappa;
        return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
    });
}

// Advances `idx` to the next k-combination of {0, ..., m-1} in lexicographic
// order; returns false after the last one.
bool next_combination(std::vector<int>& idx, int m) {
    const int k = static_cast<int>(idx.size());
    for (int i = k - 1; i >= 0; --i) {
        if (idx[i] < m - (k - i)) {
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Chebyshev LP: minimize t over (c, t) with |b - basis*c| <= t elementwise,
// returning the optimum and (optionally) an optimal c.
double chebyshev_lp(const Matrix& basis, const Vector& b, Vector* c_opt) {
    const int n = static_cast<int>(basis.rows());
    const int r = static_cast<int>(basis.cols());
    if (r == 0) {
        if (c_opt) c_opt->resize(0);
        return b.lpNorm<Eigen::Infinity>();
    }
    if (r >= n) {
        // full-rank basis spans R^n (callers pass orthonormal columns)
        if (c_opt) *c_opt = basis.colPivHouseholderQr().solve(b);
        return 0.0;
    }

    // constraints G y >= h with y = (c, t)
    const int rows = 2 * n;
    Matrix G(rows, r + 1);
    Vector h(rows);
    for (int i = 0; i < n; ++i) {
        G.row(i).head(r) = basis.row(i);
        G(i, r) = 1.0;
        h(i) = b(i);
        G.row(n + i).head(r) = -basis.row(i);
        G(n + i, r) = 1.0;
        h(n + i) = -b(i);
    }

    const double slack = 1e-9 * (1.0 + h.cwiseAbs().maxCoeff());
    double best = b.lpNorm<Eigen::Infinity>();  // c = 0 is always feasible
    Vector best_c = Vector::Zero(r);

    // An optimal basic solution has r+1 linearly independent active
    // constraints; enumerate all candidate active sets.
    std::vector<int> idx(r + 1);
    std::iota(idx.begin(), idx.end(), 0);
    Matrix A(r + 1, r + 1);
    Vector rhs(r + 1);
    do {
        for (int i = 0; i <= r; ++i) {
            A.row(i) = G.row(idx[i]);
            rhs(i) = h(idx[i]);
        }
        Eigen::FullPivLU<Matrix> lu(A);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) continue;
        const Vector y = lu.solve(rhs);
        if (((G * y).array() < (h.array() - slack)).any()) continue;
        if (y(r) < best) {
            best = y(r);
            best_c = y.head(r);
        }
    } while (next_combination(idx, rows));

    if (c_opt) *c_opt = best_c;
    return std::max(best, 0.0);
}

struct Spectral {
    Matrix U;       // q x r
    Matrix V;       // n x r
    Vector sigma;   // r
    int rank = 0;
};

Spectral thin_svd(const Matrix& O) {
    Eigen::JacobiSVD<Matrix> svd(O, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff =
        std::max(O.rows(), O.cols()) * std::numeric_limits<double>::epsilon() * (s.size() ? s(0) : 0.0);
    int r = 0;
    while (r < s.size() && s(r) > cutoff) ++r;
    return Spectral{svd.matrixU().leftCols(r), svd.matrixV().leftCols(r), s.head(r), r};
}

// Minimum-norm solution of O^T x = B in the least-squares sense, one column
// of x per target column.
Matrix min_norm_solve(const Spectral& sp, const Matrix& B) {
    if (sp.rank == 0) return Matrix::Zero(sp.U.rows(), B.cols());
    return sp.U * sp.sigma.cwiseInverse().asDiagonal() * (sp.V.transpose() * B);
}

struct AdmmOutcome {
    Matrix X;  // q x z
    bool converged = false;
    int iterations = 0;
};

AdmmOutcome admm(const Matrix& O, const Matrix& B, double alpha, double beta,
                 const SolverOptions& opts, const Matrix& X0) {
    const int q = static_cast<int>(O.rows());
    const int n = static_cast<int>(O.cols());
    const int z = static_cast<int>(B.cols());

    // x-update matrix (I + 2 O O^T) is applied via the Woodbury identity:
    // (I + 2 O O^T)^{-1} = I - O (I/2 + O^T O)^{-1} O^T. The factor is
    // independent of rho, so adapting rho costs nothing.
    Eigen::LDLT<Matrix> kkt(0.5 * Matrix::Identity(n, n) + O.transpose() * O);

    Matrix X = X0;
    Matrix R = B - O.transpose() * X;
    Matrix Z1 = X;
    Matrix Z2 = R;
    Matrix Z3 = R.cwiseMax(-beta).cwiseMin(beta);
    Matrix U1 = Matrix::Zero(q, z);
    Matrix U2 = Matrix::Zero(n, z);
    Matrix U3 = Matrix::Zero(n, z);

    double rho = 1.0;
    const double sqrt_dim_pri = std::sqrt(static_cast<double>((q + 2 * n) * z));
    const double sqrt_dim_dual = std::sqrt(static_cast<double>(q * z));
    const double c_norm = std::sqrt(2.0) * B.norm();

    AdmmOutcome out;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const Matrix rhs = (Z1 - U1) + O * (2.0 * B - Z2 - Z3 + U2 + U3);
        X = rhs - O * kkt.solve(O.transpose() * rhs);
        R = B - O.transpose() * X;

        const Matrix Z1_old = Z1;
        const Matrix Z2_old = Z2;
        const Matrix Z3_old = Z3;

        Z1 = soft_threshold(X + U1, alpha / rho);
        Matrix W2 = R + U2;
        for (int c = 0; c < z; ++c) {
            const double nrm = W2.col(c).norm();
            const double scale = (nrm > 0.0) ? std::max(1.0 - 1.0 / (rho * nrm), 0.0) : 0.0;
            Z2.col(c) = scale * W2.col(c);
        }
        Z3 = (R + U3).cwiseMax(-beta).cwiseMin(beta);

        U1 += X - Z1;
        U2 += R - Z2;
        U3 += R - Z3;

        const double pri = std::sqrt((X - Z1).squaredNorm() + (R - Z2).squaredNorm() + (R - Z3).squaredNorm());
        const double dual = rho * ((Z1 - Z1_old) - O * ((Z2 - Z2_old) + (Z3 - Z3_old))).norm();

        const double ax_norm = std::sqrt(X.squaredNorm() + 2.0 * (O.transpose() * X).squaredNorm());
        const double z_norm = std::sqrt(Z1.squaredNorm() + Z2.squaredNorm() + Z3.squaredNorm());
        const double eps_pri =
            sqrt_dim_pri * opts.abs_tol + opts.rel_tol * std::max({ax_norm, z_norm, c_norm});
        const double eps_dual =
            sqrt_dim_dual * opts.abs_tol + opts.rel_tol * rho * (U1 - O * (U2 + U3)).norm();

        if (pri <= eps_pri && dual <= eps_dual) {
            out.converged = true;
            out.iterations = iter;
            break;
        }

        // residual balancing (deterministic)
        if (iter % 10 == 0) {
            if (pri > 10.0 * dual && rho < 1e8) {
                rho *= 2.0;
                U1 *= 0.5;
                U2 *= 0.5;
                U3 *= 0.5;
            } else if (dual > 10.0 * pri && rho > 1e-8) {
                rho *= 0.5;
                U1 *= 2.0;
                U2 *= 2.0;
                U3 *= 2.0;
            }
        }
        out.iterations = iter;
    }
    out.X = X;
    return out;
}

double residual_inf_of(const Matrix& O, const Matrix& B, const Matrix& X) {
    return (B - O.transpose() * X).cwiseAbs().maxCoeff();
}

std::vector<int> support_of(const Matrix& X) {
    std::vector<int> support;
    for (int i = 0; i < X.rows(); ++i)
        if ((X.row(i).array() != 0.0).any()) support.push_back(i);
    return support;
}

}  // namespace

double chebyshev_distance(const Matrix& basis, const Vector& b) {
    return chebyshev_lp(basis, b, nullptr);
}

SparseSolution solve(const ReconstructionProblem& problem, const SolverOptions& opts) {
    validate_problem(problem);
    const Matrix& O = problem.matrix;
    const Matrix& B = problem.target;
    const int q = static_cast<int>(O.rows());
    const int n = static_cast<int>(O.cols());
    const int z = static_cast<int>(B.cols());

    const Spectral sp = thin_svd(O);

    // Exact feasibility certificate: the constraint set is nonempty iff every
    // target column is within beta (in the max norm) of the row space.
    bool certified = false;
    bool cert_feasible = true;
    std::vector<Vector> cheb_points(z);
    if (n <= opts.certificate_max_states) {
        certified = true;
        for (int c = 0; c < z; ++c) {
            Vector coeffs;
            const double dist = chebyshev_lp(sp.V, B.col(c), &coeffs);
            if (dist > problem.beta) cert_feasible = false;
            cheb_points[c] = coeffs;
        }
        if (!cert_feasible) {
            SparseSolution sol;
            sol.feasible = false;
            sol.coefficients = Matrix::Zero(z, q);
            sol.residual_inf = B.cwiseAbs().maxCoeff();
            return sol;
        }
    }

    // Warm start at the minimum-norm least-squares reconstruction.
    const Matrix X_ls = min_norm_solve(sp, B);
    AdmmOutcome out = admm(O, B, problem.alpha, problem.beta, opts, X_ls);
    if (!out.converged)
        throw SolverError("solve: no convergence within " + std::to_string(opts.max_iterations) +
                          " iterations");

    Matrix X = out.X;
    const double max_mag = X.cwiseAbs().maxCoeff();
    if (max_mag > 0.0) {
        const double cut = opts.zero_threshold * max_mag;
        X = X.unaryExpr([cut](double v) { return std::abs(v) < cut ? 0.0 : v; });
    }

    double res = residual_inf_of(O, B, X);
    if (res > problem.beta) {
        // The iterate may sit marginally outside the box when the constraint
        // is active at the optimum. Blend toward a known feasible point; the
        // residual is affine in X, so a small step restores feasibility.
        std::vector<Matrix> candidates;
        if (residual_inf_of(O, B, X_ls) <= problem.beta) candidates.push_back(X_ls);
        if (certified) {
            Matrix X_cheb(q, z);
            for (int c = 0; c < z; ++c)
                X_cheb.col(c) =
                    (sp.rank > 0)
                        ? Matrix(sp.U * sp.sigma.cwiseInverse().asDiagonal() * cheb_points[c])
                        : Matrix(Vector::Zero(q));
            candidates.push_back(std::move(X_cheb));
        }
        for (const Matrix& cand : candidates) {
            const double cand_res = residual_inf_of(O, B, cand);
            if (cand_res > problem.beta || cand_res >= res) continue;
            double t = (res - problem.beta) / (res - cand_res) * (1.0 + 1e-9);
            t = std::min(t, 1.0);
            X = (1.0 - t) * X + t * cand;
            res = residual_inf_of(O, B, X);
            if (res <= problem.beta) break;
        }
    }

    bool feasible;
    if (certified) {
        feasible = true;  // certificate holds; res may still marginally exceed beta
        if (res > problem.beta) {
            // last resort: the pure Chebyshev point is feasible by construction
            Matrix X_cheb(q, z);
            for (int c = 0; c < z; ++c)
                X_cheb.col(c) =
                    (sp.rank > 0)
                        ? Matrix(sp.U * sp.sigma.cwiseInverse().asDiagonal() * cheb_points[c])
                        : Matrix(Vector::Zero(q));
            X = X_cheb;
            res = residual_inf_of(O, B, X);
        }
    } else {
        // No exact certificate at this dimension; fall back on bounds.
        if (res <= problem.beta) {
            feasible = true;
        } else {
            const Matrix ls_residual = B - O.transpose() * X_ls;
            if (ls_residual.colwise().norm().maxCoeff() > problem.beta * std::sqrt(static_cast<double>(n))) {
                feasible = false;  // even the l2-optimal residual is too large
            } else {
                throw SolverError("solve: cannot certify feasibility near the beta threshold");
            }
        }
    }

    SparseSolution sol;
    sol.feasible = feasible;
    if (feasible) {
        sol.support = support_of(X);
        sol.coefficients = X.transpose();
        sol.residual_inf = res;
    } else {
        sol.coefficients = Matrix::Zero(z, q);
        sol.residual_inf = B.cwiseAbs().maxCoeff();
    }
    return sol;
}

SparseSolution prune(const ReconstructionProblem& problem, const SparseSolution& raw) {
    if (!raw.feasible) throw std::invalid_argument("prune: raw solution must be feasible");
    const Matrix& O = problem.matrix;
    const Matrix& B = problem.target;
    const int q = static_cast<int>(O.rows());
    const int z = static_cast<int>(B.cols());
    if (raw.coefficients.rows() != z || raw.coefficients.cols() != q)
        throw std::invalid_argument("prune: coefficient shape mismatch");

    // visit rows by descending magnitude (max across target columns),
    // breaking ties by ascending row index
    std::vector<int> order = raw.support;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ma = raw.coefficients.col(a).cwiseAbs().maxCoeff();
        const double mb = raw.coefficients.col(b).cwiseAbs().maxCoeff();
        if (ma != mb) return ma > mb;
        return a < b;
    });

    std::vector<int> chosen;
    Matrix coeffs;
    double res = B.cwiseAbs().maxCoeff();
    for (int row : order) {
        chosen.push_back(row);
        Matrix O_sub(chosen.size(), O.cols());
        for (size_t i = 0; i < chosen.size(); ++i) O_sub.row(i) = O.row(chosen[i]);
        const Spectral sp = thin_svd(O_sub);
        const Matrix X_sub = min_norm_solve(sp, B);  // |chosen| x z
        res = residual_inf_of(O_sub, B, X_sub);
        if (res <= problem.beta) {
            SparseSolution sol;
            sol.feasible = true;
            sol.coefficients = Matrix::Zero(z, q);
            for (size_t i = 0; i < chosen.size(); ++i) sol.coefficients.col(chosen[i]) = X_sub.row(i).transpose();
            sol.support = support_of(sol.coefficients.transpose());
            sol.residual_inf = res;
            return sol;
        }
    }

    SparseSolution sol;
    sol.feasible = false;
    sol.coefficients = Matrix::Zero(z, q);
    sol.residual_inf = res;
    return sol;
}

}  // namespace eiso
