#include "eiso/empirical.hpp"

#include <Eigen/Eigenvalues>

#include <exception>
#include <fstream>
#include <limits>

namespace eiso {

EmpiricalObservabilityMatrix EmpiricalObservabilityMatrix::from_entries(Matrix entries, double dt,
                                                                        double epsilon) {
    if (dt <= 0.0) throw std::invalid_argument("from_entries: dt must be positive");
    EmpiricalObservabilityMatrix M;
    M.row_meta.resize(entries.rows());
    for (int k = 0; k < entries.rows(); ++k) M.row_meta[k] = RowMeta{k, 0};
    M.entries = std::move(entries);
    M.epsilon = epsilon;
    M.dt = dt;
    M.x0 = Vector::Zero(M.entries.cols());
    return M;
}

std::vector<Vector> perturbed_outputs(const SystemModel& system, const Vector& x0,
                                      const InputSchedule& inputs, int state_index,
                                      int sign, double epsilon, int samples) {
    if (state_index < 0 || state_index >= system.n)
        throw std::invalid_argument("perturbed_outputs: state index out of range");
    if (sign != 1 && sign != -1) throw std::invalid_argument("perturbed_outputs: sign must be +1 or -1");
    if (epsilon <= 0.0) throw std::invalid_argument("perturbed_outputs: epsilon must be positive");

    Vector x = x0;
    x[state_index] += sign * epsilon;
    return simulate(system, x, inputs, samples).outputs;
}

namespace {

// Fills column j of the matrix from the +/- perturbed simulations.
void fill_column(const SystemModel& system, const Vector& x0, const InputSchedule& inputs,
                 int w, double epsilon, int j, Matrix& entries) {
    const std::vector<Vector> plus = perturbed_outputs(system, x0, inputs, j, +1, epsilon, w);
    const std::vector<Vector> minus = perturbed_outputs(system, x0, inputs, j, -1, epsilon, w);
    const int p = system.p;
    for (int k = 0; k < w; ++k) {
        for (int s = 0; s < p; ++s) {
            double dy = plus[k][s] - minus[k][s];
            if (system.output_kinds[s] == OutputKind::Angular) dy = wrap_angle(dy);
            entries(k * p + s, j) = dy / (2.0 * epsilon);
        }
    }
}

EmpiricalObservabilityMatrix make_window(const SystemModel& system, const Vector& x0,
                                         const InputSchedule& inputs, int w, double epsilon) {
    EmpiricalObservabilityMatrix M;
    M.entries.resize(w * system.p, system.n);
    M.row_meta.resize(w * system.p);
    for (int k = 0; k < w; ++k)
        for (int s = 0; s < system.p; ++s) M.row_meta[k * system.p + s] = RowMeta{k, s};
    M.epsilon = epsilon;
    M.dt = inputs.dt;
    M.x0 = x0;
    return M;
}

void validate_window_args(const SystemModel& system, const InputSchedule& inputs, int w, double epsilon) {
    if (w < 1) throw std::invalid_argument("build_matrix: window length must be >= 1");
    if (epsilon <= 0.0) throw std::invalid_argument("build_matrix: epsilon must be positive");
    if (w > static_cast<int>(inputs.values.size()) + 1)
        throw std::invalid_argument("build_matrix: schedule too short for window length " + std::to_string(w));
    if (static_cast<int>(system.output_kinds.size()) != system.p)
        throw std::invalid_argument("build_matrix: output_kinds length must equal p");
}

}  // namespace

namespace ref {

EmpiricalObservabilityMatrix build_matrix(const SystemModel& system, const Vector& x0,
                                          const InputSchedule& inputs, int w, double epsilon) {
    validate_window_args(system, inputs, w, epsilon);
    EmpiricalObservabilityMatrix M = make_window(system, x0, inputs, w, epsilon);
    for (int j = 0; j < system.n; ++j) fill_column(system, x0, inputs, w, epsilon, j, M.entries);
    return M;
}

std::vector<EmpiricalObservabilityMatrix> sliding_windows(const SystemModel& system,
                                                          const Trajectory& nominal,
                                                          const InputSchedule& inputs, int w,
                                                          double epsilon) {
    if (w < 1 || w > nominal.samples())
        throw std::invalid_argument("sliding_windows: window does not fit inside the trajectory");
    const int count = nominal.samples() - w + 1;
    std::vector<EmpiricalObservabilityMatrix> windows;
    windows.reserve(count);
    for (int t = 0; t < count; ++t)
        windows.push_back(
            ref::build_matrix(system, nominal.states[t], inputs.slice(t, w - 1), w, epsilon));
    return windows;
}

}  // namespace ref

EmpiricalObservabilityMatrix build_matrix(const SystemModel& system, const Vector& x0,
                                          const InputSchedule& inputs, int w, double epsilon,
                                          int threads) {
    validate_window_args(system, inputs, w, epsilon);
    EmpiricalObservabilityMatrix M = make_window(system, x0, inputs, w, epsilon);

    const int nthreads = resolve_threads(threads);
    std::exception_ptr failure;
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (int j = 0; j < system.n; ++j) {
        try {
            fill_column(system, x0, inputs, w, epsilon, j, M.entries);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return M;
}

std::vector<EmpiricalObservabilityMatrix> sliding_windows(const SystemModel& system,
                                                          const Trajectory& nominal,
                                                          const InputSchedule& inputs, int w,
                                                          double epsilon, int threads) {
    if (w < 1 || w > nominal.samples())
        throw std::invalid_argument("sliding_windows: window does not fit inside the trajectory");
    const int count = nominal.samples() - w + 1;
    std::vector<EmpiricalObservabilityMatrix> windows(count);

    const int nthreads = resolve_threads(threads);
    std::exception_ptr failure;
#pragma omp parallel for num_threads(nthreads) schedule(dynamic)
    for (int t = 0; t < count; ++t) {
        try {
            windows[t] = ref::build_matrix(system, nominal.states[t], inputs.slice(t, w - 1), w, epsilon);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return windows;
}

GramianMeasures empirical_gramian(const EmpiricalObservabilityMatrix& M, double sigma0) {
    if (!M.entries.allFinite()) throw std::invalid_argument("empirical_gramian: entries must be finite");
    if (sigma0 <= 0.0) throw std::invalid_argument("empirical_gramian: sigma0 must be positive");

    GramianMeasures g;
    g.gramian = M.entries.transpose() * M.entries * M.dt;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(g.gramian, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (lmin < sigma0 * sigma0) {
        g.unobservability_index = std::numeric_limits<double>::infinity();
        g.estimation_condition_number = std::numeric_limits<double>::infinity();
    } else {
        g.unobservability_index = 1.0 / lmin;
        g.estimation_condition_number = lmax / lmin;
    }
    return g;
}

void save_csv(const EmpiricalObservabilityMatrix& M, const std::string& base_path) {
    std::ofstream mat(base_path + ".csv");
    if (!mat) throw std::runtime_error("save_csv: cannot open " + base_path + ".csv");
    for (int i = 0; i < M.entries.rows(); ++i) {
        for (int j = 0; j < M.entries.cols(); ++j) {
            if (j) mat << ',';
            mat << format_float(M.entries(i, j));
        }
        mat << '\n';
    }

    std::ofstream meta(base_path + ".meta.csv");
    if (!meta) throw std::runtime_error("save_csv: cannot open " + base_path + ".meta.csv");
    meta << "row,time_index,output_index\n";
    for (size_t i = 0; i < M.row_meta.size(); ++i)
        meta << i << ',' << M.row_meta[i].time_index << ',' << M.row_meta[i].output_index << '\n';
}

}  // namespace eiso
