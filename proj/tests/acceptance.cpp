// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Runs headlessly from the build tree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eiso/experiment.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace eiso;

namespace {

namespace fs = std::filesystem;

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& msg) { g_notes.push_back(msg); }

void check(bool ok, const std::string& what) {
    if (!ok) note("FAILED: " + what);
}

void criterion(int id, const char* description, const std::function<void()>& body,
               double time_limit_s) {
    g_notes.clear();
    const auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        note(std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > time_limit_s)
        note("runtime " + format_float(elapsed) + "s exceeds " + format_float(time_limit_s) + "s");

    const bool ok = g_notes.empty();
    if (!ok) ++g_failures;
    std::printf("[%s] criterion %d: %s (%.2fs)\n", ok ? "PASS" : "FAIL", id, description, elapsed);
    for (const std::string& msg : g_notes) std::printf("         %s\n", msg.c_str());
    std::fflush(stdout);
}

double symmetric_uniform(std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    return 2.0 * u - 1.0;
}

ExperimentConfig load_config(const char* name) {
    return ExperimentConfig::load((fs::path(EISO_CONFIG_DIR) / name).string());
}

const WindowResult& find_row(const ExperimentReport& report, int anchor, int subset,
                             const std::vector<int>& target) {
    for (const WindowResult& r : report.per_window)
        if (r.anchor_index == anchor && r.subset_id == subset && r.target_set == target) return r;
    throw std::runtime_error("report row not found");
}

// ---- criterion bodies ------------------------------------------------------

void lti_exactness() {
    const Matrix A = fixtures::decay3_A();
    const Matrix C = Matrix::Identity(3, 3);
    const SystemModel sys = fixtures::decay3_system(C);
    const Vector x0 = Vector::Zero(3);  // anchor-independent for linear systems
    const Matrix stacked = oracles::stacked_observability(A, C, 10);

    for (double eps : {1e-6, 1e-3, 1e-1}) {
        const auto M = build_matrix(sys, x0, InputSchedule::zeros(0, 9, 1.0), 10, eps);
        const double rel = (M.entries - stacked).norm() / stacked.norm();
        check(rel <= 1e-10, "relative error " + format_float(rel) + " at epsilon " + format_float(eps));
    }
}

void gramian_convergence() {
    const Matrix A = fixtures::dense3_A();
    const Matrix C = fixtures::dense3_C();
    const SystemModel sys = fixtures::dense3_system();
    const Vector x0 = (Vector(3) << 1.0, 1.0, 1.0).finished();
    const Matrix W_quad = oracles::gramian_by_simpson(A, C, 1.0, 4000);

    double prev = std::numeric_limits<double>::infinity();
    double final_rel = 0.0;
    for (int level = 0; level <= 3; ++level) {
        const int w = 100 << level;
        const double dt = 1.0 / w;
        const double eps = 1e-3 / (1 << level);
        const auto M = build_matrix(sys, x0, InputSchedule::zeros(0, w - 1, dt), w, eps);
        const double err = (M.entries.transpose() * M.entries * dt - W_quad).norm();
        check(err < prev, "error not monotone at level " + std::to_string(level) + ": " +
                              format_float(err) + " vs " + format_float(prev));
        prev = err;
        final_rel = err / W_quad.norm();
    }
    check(final_rel <= 1e-3, "final relative error " + format_float(final_rel));
}

void deep_window_convergence() {
    const ExperimentConfig cfg = load_config("linear_window.json");
    const ExperimentReport report = run_experiment(cfg, 0);

    double gramian_cond = 0.0;
    for (const WindowGramian& g : report.gramian_summary)
        if (g.anchor_index == 0 && g.subset_id == 0) gramian_cond = g.estimation_condition_number;
    check(std::isfinite(gramian_cond), "gramian condition number must be finite");

    for (const auto& target : cfg.targets) {
        double last_kappa = 0.0;
        int first_iter_rows = -1;
        for (const IterationTrace& t : report.iterations) {
            if (t.target_set != target) continue;
            last_kappa = t.kappa_squared;
            if (t.iteration == 1) first_iter_rows = static_cast<int>(t.new_rows.size());
        }
        std::string label;
        for (int s : target) label += std::to_string(s);
        check(last_kappa > 0.0, "target " + label + ": no iterations recorded");
        const double rel = std::abs(last_kappa - gramian_cond) / gramian_cond;
        check(rel <= 0.05, "target " + label + ": last kappa^2 " + format_float(last_kappa) +
                               " vs gramian " + format_float(gramian_cond) + " (rel " +
                               format_float(rel) + ")");
        if (target == std::vector<int>{0})
            check(first_iter_rows == 1, "first iteration for state 0 selected " +
                                            std::to_string(first_iter_rows) + " rows");
    }
}

void motivating_examples() {
    EisoParams params;
    params.alpha = 1e-6;
    params.beta = 1e-3;
    params.sigma0 = 1e-6;

    for (const Matrix& entries :
         {fixtures::diag_scaled2(), fixtures::chained2(), fixtures::nearly_singular2()}) {
        const auto M = EmpiricalObservabilityMatrix::from_entries(entries, 1.0);
        const EisoResult res = run(M, 0, params);
        check(res.observable, "state 0 must be observable");
        if (!res.iterations.empty()) {
            check(res.iterations.front().iteration == 1, "first record must be iteration 1");
            const double k1 = res.iterations.front().kappa_squared;
            check(std::abs(k1 - 1.0) <= 1e-9, "iteration-1 kappa^2 = " + format_float(k1));
        }
    }

    const auto M2 = EmpiricalObservabilityMatrix::from_entries(fixtures::chained2(), 1.0);
    const Matrix G = empirical_gramian(M2).gramian;
    const Matrix expected = (Matrix(2, 2) << 2.0, 1.0, 1.0, 1.0).finished();
    check(G == expected, "gramian of the chained matrix must equal [[2,1],[1,1]] exactly");
}

void oracle_equivalence() {
    // Fixed recipe: mt19937_64 seeded with 0xE15012345, entries uniform in
    // [-1,1] (53-bit), q in 2..10, n in 2..4; one column zeroed with
    // probability 1/4; one row scaled by 1e-4 with probability 1/4.
    std::mt19937_64 rng(0xE15012345ull);
    EisoParams params;
    params.alpha = 1e-6;
    params.beta = 1e-3;
    params.sigma0 = 1e-6;

    const int trials = 200;
    int agree = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const int q = 2 + static_cast<int>(rng() % 9);
        const int n = 2 + static_cast<int>(rng() % 3);
        Matrix entries(q, n);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < n; ++j) entries(i, j) = symmetric_uniform(rng);
        if (rng() % 4 == 0) entries.col(static_cast<int>(rng() % n)).setZero();
        if (rng() % 4 == 0) entries.row(static_cast<int>(rng() % q)) *= 1e-4;
        const int target = static_cast<int>(rng() % n);
        const Matrix B = Vector::Unit(n, target);

        const auto M = EmpiricalObservabilityMatrix::from_entries(entries, 1.0);
        const EisoResult res = run(M, target, params);
        const OracleResult oracle = exhaustive_oracle(entries, B, params.beta, params.sigma0);

        if (res.observable && oracle.feasible)
            check(res.kappa_min >= oracle.best_kappa_squared * (1.0 - 1e-9),
                  "trial " + std::to_string(trial) + ": kappa_min " + format_float(res.kappa_min) +
                      " below oracle optimum " + format_float(oracle.best_kappa_squared));

        if (res.observable == oracle.feasible) {
            ++agree;
        } else {
            // disagreements must sit near the beta / sigma0 thresholds
            double min_residual = std::numeric_limits<double>::infinity();
            double best_admissible_sigma = 0.0;
            for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << q); ++mask) {
                std::vector<int> subset;
                for (int i = 0; i < q; ++i)
                    if (mask & (std::uint64_t(1) << i)) subset.push_back(i);
                Matrix rows(subset.size(), n);
                for (size_t i = 0; i < subset.size(); ++i) rows.row(i) = entries.row(subset[i]);
                Eigen::JacobiSVD<Matrix> svd(rows.transpose(),
                                             Eigen::ComputeThinU | Eigen::ComputeThinV);
                const Matrix x = svd.solve(B);
                const double res_inf = (B - rows.transpose() * x).cwiseAbs().maxCoeff();
                min_residual = std::min(min_residual, res_inf);
                if (res_inf <= params.beta) {
                    Eigen::JacobiSVD<Matrix> sv(rows);
                    best_admissible_sigma = std::max(best_admissible_sigma, sv.singularValues()(0));
                }
            }
            const bool near_beta = min_residual >= params.beta / 10.0 && min_residual <= params.beta * 10.0;
            const bool near_sigma = best_admissible_sigma >= params.sigma0 / 10.0 &&
                                    best_admissible_sigma <= params.sigma0 * 10.0;
            check(near_beta || near_sigma,
                  "trial " + std::to_string(trial) + ": disagreement far from thresholds (residual " +
                      format_float(min_residual) + ")");
        }
    }
    check(agree >= 196, "agreement " + std::to_string(agree) + "/200 below 98%");
}

void fly_reproduction() {
    // (a) constant trajectory: only the heading is observable
    {
        const ExperimentConfig cfg = load_config("fly_constant.json");
        const ExperimentReport report = run_experiment(cfg, 0);
        const int windows = cfg.samples() - cfg.window + 1;
        check(windows == 48, "expected 48 windows, got " + std::to_string(windows));
        for (int t = 0; t < windows; ++t)
            for (int j = 0; j < 5; ++j) {
                const bool obs = find_row(report, t, 0, {j}).observable;
                check(obs == (j == 3), "constant: window " + std::to_string(t) + " state " +
                                           std::to_string(j) + (obs ? " observable" : " unobservable"));
            }
    }

    // (b) turning: heading plus wind direction, exactly in turning windows;
    //     the angular sensor pair {phi, gamma} suffices for the wind direction
    {
        const ExperimentConfig cfg = load_config("fly_turning.json");
        const InputSchedule schedule = cfg.make_schedule();
        const ExperimentReport report = run_experiment(cfg, 0);
        const int windows = cfg.samples() - cfg.window + 1;
        for (int t = 0; t < windows; ++t) {
            const bool turning = schedule.values[t](1) != 0.0 || schedule.values[t + 1](1) != 0.0;
            for (int j = 0; j < 5; ++j) {
                const bool expect = (j == 3) || (j == 4 && turning);
                const bool obs = find_row(report, t, 0, {j}).observable;
                check(obs == expect, "turning: window " + std::to_string(t) + " state " +
                                         std::to_string(j) + " expected " +
                                         (expect ? "observable" : "unobservable"));
            }
            const bool zeta_angular = find_row(report, t, 1, {4}).observable;
            check(zeta_angular == turning, "turning: window " + std::to_string(t) +
                                               " wind direction under {phi,gamma} expected " +
                                               (turning ? "observable" : "unobservable"));
        }
    }

    // (c) accelerating: all states in fully accelerating windows; optic flow
    //     is required for the full state
    {
        const ExperimentConfig cfg = load_config("fly_accelerating.json");
        const InputSchedule schedule = cfg.make_schedule();
        const ExperimentReport report = run_experiment(cfg, 0);
        const int windows = cfg.samples() - cfg.window + 1;
        const std::vector<int> full{0, 1, 2, 3, 4};
        for (int t = 0; t < windows; ++t) {
            const int accel_steps = (schedule.values[t](0) != 0.0 ? 1 : 0) +
                                    (schedule.values[t + 1](0) != 0.0 ? 1 : 0);
            for (int j = 0; j < 5; ++j) {
                bool expect = (j == 3);
                if (accel_steps >= 1 && (j == 0 || j == 1)) expect = true;  // optic-flow pair
                if (accel_steps == 2) expect = true;  // three distinct samples: every state
                const bool obs = find_row(report, t, 0, {j}).observable;
                check(obs == expect, "accel: window " + std::to_string(t) + " state " +
                                         std::to_string(j) + " expected " +
                                         (expect ? "observable" : "unobservable"));
            }
            const bool full_all = find_row(report, t, 0, full).observable;
            check(full_all == (accel_steps == 2),
                  "accel: window " + std::to_string(t) + " full state under all sensors");
            const bool full_no_optic = find_row(report, t, 1, full).observable;
            check(!full_no_optic,
                  "accel: window " + std::to_string(t) + " full state must need optic flow");
        }
    }
}

void sensor_correlation() {
    const ExperimentConfig cfg = load_config("sensor_sweep.json");
    const SensorStudyReport report = sensor_selection_study(cfg, 0);

    for (const SensorSetResult& set : report.sets) {
        if (set.name == "s1+s2+s3")
            for (double k : set.kappa_min)
                check(std::abs(k - 1.0) <= 1e-9, "identity set kappa_min " + format_float(k));
        if (set.name == "s3")
            check(!set.observable[0] && !set.observable[1] && set.observable[2],
                  "s3 must only observe the decoupled state");
    }
    check(report.regression_points >= 4, "regression needs at least 4 finite sensor sets, got " +
                                             std::to_string(report.regression_points));
    check(report.log_log_r_squared >= 0.9,
          "log-log R^2 = " + format_float(report.log_log_r_squared));
}

void combination_counts() {
    check(combination_count(100) == "1267650600228229401496703205375",
          "combination_count(100) mismatch");
    check(combination_count(100).size() == 31, "2^100 - 1 must exceed 10^30");
    check(combination_count(3) == "7", "combination_count(3) mismatch");
}

void property_suites() {
    // angular wrap at the branch cut
    {
        const SystemModel sys = fly_model();
        const Vector x0 = (Vector(5) << 1.0, 1.0, 1.0, 0.0, std::acos(-1.0)).finished();
        const auto M = build_matrix(sys, x0, InputSchedule::zeros(2, 2, 0.1), 3, 1e-3);
        check(M.entries.cwiseAbs().maxCoeff() < 100.0, "wrapped difference must stay bounded");
    }

    // gramian PSD across fixtures
    {
        const std::vector<Matrix> fixtures_psd = {
            fixtures::chained2(), fixtures::diag_scaled2(), fixtures::nearly_singular2(),
            oracles::stacked_observability(fixtures::decay3_A(), Matrix::Identity(3, 3), 8)};
        for (const Matrix& entries : fixtures_psd) {
            const auto M = EmpiricalObservabilityMatrix::from_entries(entries, 1.0);
            const Matrix G = empirical_gramian(M).gramian;
            check((G - G.transpose()).norm() <= 1e-12 * std::max(1.0, G.norm()),
                  "gramian must be symmetric");
            Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
            check(eig.eigenvalues().minCoeff() >= -1e-12 * eig.eigenvalues().maxCoeff(),
                  "gramian must be positive semidefinite");
        }
    }

    // pruning monotonicity under least-squares re-fit
    {
        const ReconstructionProblem p{fixtures::chained2(), Matrix(Vector::Unit(2, 1)), 1e-6, 1e-3};
        const SparseSolution raw = solve(p);
        check(raw.feasible, "chained reconstruction must be feasible");
        if (raw.feasible) {
            std::vector<int> order = raw.support;
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double ma = raw.coefficients.col(a).cwiseAbs().maxCoeff();
                const double mb = raw.coefficients.col(b).cwiseAbs().maxCoeff();
                if (ma != mb) return ma > mb;
                return a < b;
            });
            double prev = 1.0;
            std::vector<int> chosen;
            for (int row : order) {
                chosen.push_back(row);
                Matrix sub(chosen.size(), 2);
                for (size_t i = 0; i < chosen.size(); ++i) sub.row(i) = p.matrix.row(chosen[i]);
                const Matrix x = Eigen::JacobiSVD<Matrix>(sub.transpose(),
                                                          Eigen::ComputeThinU | Eigen::ComputeThinV)
                                     .solve(p.target);
                const double res = (p.target - sub.transpose() * x).cwiseAbs().maxCoeff();
                check(res <= prev + 1e-12, "pruning residual must not increase");
                prev = res;
            }
        }
    }

    // CLI determinism and round trip on a small run
    {
        ExperimentConfig cfg = load_config("fly_turning.json");
        cfg.duration = 1.5;  // shrink the grid; properties are per-row
        const fs::path dir_a = fs::temp_directory_path() / "eiso_accept_a";
        const fs::path dir_b = fs::temp_directory_path() / "eiso_accept_b";
        fs::remove_all(dir_a);
        fs::remove_all(dir_b);
        emit_plot_data(run_experiment(cfg, 0), dir_a.string());
        emit_plot_data(run_experiment(cfg, 2), dir_b.string());

        for (const char* name : {"windows.csv", "iterations.csv", "report.json"}) {
            std::ifstream fa(dir_a / name, std::ios::binary), fb(dir_b / name, std::ios::binary);
            std::stringstream sa, sb;
            sa << fa.rdbuf();
            sb << fb.rdbuf();
            check(sa.str() == sb.str(), std::string(name) + " must be identical across runs");
        }

        std::ifstream in(dir_a / "windows.csv");
        std::string line;
        std::getline(in, line);
        int checked = 0;
        while (std::getline(in, line)) {
            std::stringstream row(line);
            std::string cell;
            int col = 0;
            while (std::getline(row, cell, ',')) {
                if (col == 1 || col == 4 || col == 8 || col == 9) {
                    const double parsed = std::strtod(cell.c_str(), nullptr);
                    if (format_float(parsed) != cell) {
                        check(false, "round trip failed on cell '" + cell + "'");
                    }
                    ++checked;
                }
                ++col;
            }
        }
        check(checked > 0, "round trip must inspect at least one float");
        fs::remove_all(dir_a);
        fs::remove_all(dir_b);
    }
}

}  // namespace

int main() {
    criterion(1, "empirical matrix matches the stacked LTI form exactly", lti_exactness, 1.0);
    criterion(2, "gramian approximation converges to the quadrature oracle", gramian_convergence, 10.0);
    criterion(3, "deep-window selection converges to the gramian condition number",
              deep_window_convergence, 60.0);
    criterion(4, "motivating 2x2 matrices: state one is equally well posed", motivating_examples, 5.0);
    criterion(5, "selection agrees with the exhaustive oracle on random instances",
              oracle_equivalence, 300.0);
    criterion(6, "fly trajectories: turning and accelerating unlock states", fly_reproduction, 120.0);
    criterion(7, "gramian condition number tracks the least observable state", sensor_correlation,
              60.0);
    criterion(8, "row-subset count is exactly 2^rows - 1", combination_counts, 1.0);
    criterion(9, "property suites: wrap, PSD, pruning, determinism, round trip", property_suites,
              60.0);

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d acceptance criteria failed\n", g_failures);
    }
    return g_failures;
}
