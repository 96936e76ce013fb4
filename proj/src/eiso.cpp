#include "eiso/eiso.hpp"

#include <Eigen/Dense>
#include <gmpxx.h>

#include <algorithm>
#include <limits>

namespace eiso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix select_rows(const Matrix& M, const std::vector<int>& rows) {
    Matrix out(rows.size(), M.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(i) = M.row(rows[i]);
    return out;
}

Matrix basis_columns(int n, const std::vector<int>& targets) {
    Matrix B = Matrix::Zero(n, targets.size());
    for (size_t c = 0; c < targets.size(); ++c) B(targets[c], c) = 1.0;
    return B;
}

void validate_targets(int n, const std::vector<int>& targets) {
    if (targets.empty()) throw std::invalid_argument("run: targets must be nonempty");
    std::vector<int> sorted = targets;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("run: targets must be distinct");
    if (sorted.front() < 0 || sorted.back() >= n)
        throw std::invalid_argument("run: target state index out of range");
}

int numerical_rank(const Matrix& M, double sigma0) {
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    const double threshold = sigma0 * s(0);
    int rank = 0;
    while (rank < s.size() && s(rank) >= threshold) ++rank;
    return rank;
}

}  // namespace

std::optional<TruncatedMeasures> truncated_measures(const Matrix& subset, double sigma0) {
    if (subset.rows() < 1) throw std::invalid_argument("truncated_measures: subset must be nonempty");
    if (sigma0 <= 0.0) throw std::invalid_argument("truncated_measures: sigma0 must be positive");

    Eigen::JacobiSVD<Matrix> svd(subset);
    const Vector& s = svd.singularValues();
    TruncatedMeasures m;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) >= sigma0) m.retained_singular_values.push_back(s(i));
    if (m.retained_singular_values.empty()) return std::nullopt;
    m.kappa_squared =
        std::pow(m.retained_singular_values.front() / m.retained_singular_values.back(), 2.0);
    return m;
}

EisoResult run(const EmpiricalObservabilityMatrix& M, const std::vector<int>& targets,
               const EisoParams& params) {
    const int q = M.rows();
    const int n = M.states();
    validate_targets(n, targets);
    if (params.sigma0 <= 0.0) throw std::invalid_argument("run: sigma0 must be positive");

    const Matrix B = basis_columns(n, targets);

    EisoResult result;
    result.target_states = targets;

    std::vector<int> alive(q);
    for (int i = 0; i < q; ++i) alive[i] = i;
    std::vector<int> cumulative;

    for (int iter = 1; iter <= params.max_iterations && !alive.empty(); ++iter) {
        const Matrix candidate = select_rows(M.entries, alive);
        if (candidate.cwiseAbs().maxCoeff() == 0.0) break;  // nothing informative left

        ReconstructionProblem problem{candidate, B, params.alpha, params.beta};
        const SparseSolution raw = solve(problem, params.solver);
        if (!raw.feasible) break;
        const SparseSolution pruned = prune(problem, raw);
        if (!pruned.feasible) break;

        std::vector<int> new_rows;
        new_rows.reserve(pruned.support.size());
        for (int local : pruned.support) new_rows.push_back(alive[local]);
        std::sort(new_rows.begin(), new_rows.end());

        cumulative.insert(cumulative.end(), new_rows.begin(), new_rows.end());
        std::sort(cumulative.begin(), cumulative.end());

        // A selection whose singular values all fall below sigma0 yields no
        // measure, but its rows stay removed so later iterations can still
        // surface informative subsets.
        if (auto measures = truncated_measures(select_rows(M.entries, cumulative), params.sigma0)) {
            IterationRecord rec;
            rec.iteration = iter;
            rec.new_rows = new_rows;
            rec.cumulative_rows = cumulative;
            rec.retained_singular_values = measures->retained_singular_values;
            rec.kappa_squared = measures->kappa_squared;
            result.iterations.push_back(std::move(rec));
        }

        std::vector<int> next_alive;
        next_alive.reserve(alive.size() - new_rows.size());
        std::set_difference(alive.begin(), alive.end(), new_rows.begin(), new_rows.end(),
                            std::back_inserter(next_alive));
        alive = std::move(next_alive);
    }

    result.kappa_min = kInf;
    for (const IterationRecord& rec : result.iterations)
        result.kappa_min = std::min(result.kappa_min, rec.kappa_squared);
    result.observable = std::isfinite(result.kappa_min);
    return result;
}

EisoResult run(const EmpiricalObservabilityMatrix& M, int target, const EisoParams& params) {
    return run(M, std::vector<int>{target}, params);
}

EisoResult run_multi(const EmpiricalObservabilityMatrix& M, const std::vector<int>& targets,
                     const EisoParams& params) {
    if (targets.size() < 2) throw std::invalid_argument("run_multi: needs at least two targets");
    return run(M, targets, params);
}

bool rank_augmentation_check(const Matrix& entries, int state_index, double sigma0) {
    const int n = static_cast<int>(entries.cols());
    if (state_index < 0 || state_index >= n)
        throw std::invalid_argument("rank_augmentation_check: state index out of range");
    if (sigma0 <= 0.0) throw std::invalid_argument("rank_augmentation_check: sigma0 must be positive");

    const Matrix Mt = entries.transpose();  // n x q
    Matrix augmented(n, Mt.cols() + 1);
    augmented.leftCols(Mt.cols()) = Mt;
    augmented.col(Mt.cols()) = Vector::Unit(n, state_index);
    return numerical_rank(Mt, sigma0) == numerical_rank(augmented, sigma0);
}

bool rank_augmentation_check(const EmpiricalObservabilityMatrix& M, int state_index, double sigma0) {
    return rank_augmentation_check(M.entries, state_index, sigma0);
}

std::string combination_count(int rows) {
    if (rows < 1) throw std::invalid_argument("combination_count: rows must be positive");
    mpz_class count = (mpz_class(1) << rows) - 1;
    return count.get_str();
}

OracleResult exhaustive_oracle(const Matrix& entries, const Matrix& target, double beta,
                               double sigma0, int max_rows) {
    const int q = static_cast<int>(entries.rows());
    if (q > max_rows)
        throw std::invalid_argument("exhaustive_oracle: " + std::to_string(q) +
                                    " rows exceeds the enumeration cap of " + std::to_string(max_rows));
    if (target.rows() != entries.cols())
        throw std::invalid_argument("exhaustive_oracle: target dimension mismatch");

    OracleResult best;
    best.best_kappa_squared = kInf;

    std::vector<int> subset;
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << q); ++mask) {
        subset.clear();
        for (int i = 0; i < q; ++i)
            if (mask & (std::uint64_t(1) << i)) subset.push_back(i);

        const Matrix rows = select_rows(entries, subset);
        // minimum-norm least squares of rows^T x = target
        Eigen::JacobiSVD<Matrix> svd(rows.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Matrix x = svd.solve(target);
        const double res = (target - rows.transpose() * x).cwiseAbs().maxCoeff();
        if (res > beta) continue;

        const auto measures = truncated_measures(rows, sigma0);
        if (!measures) continue;
        if (measures->kappa_squared < best.best_kappa_squared) {
            best.best_kappa_squared = measures->kappa_squared;
            best.best_subset = subset;
            best.feasible = true;
        }
    }
    return best;
}

}  // namespace eiso
