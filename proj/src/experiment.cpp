#include "eiso/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace eiso {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void config_error(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

const json& require(const json& j, const char* key) {
    if (!j.contains(key)) config_error(std::string("missing field '") + key + "'");
    return j.at(key);
}

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) config_error("field '" + key + "' must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) config_error("field '" + key + "' must be an integer");
    return v.get<int>();
}

Vector parse_vector(const json& v, const std::string& key) {
    if (!v.is_array()) config_error("field '" + key + "' must be an array of numbers");
    Vector out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out(i) = as_number(v[i], key);
    return out;
}

Matrix parse_matrix(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty()) config_error("field '" + key + "' must be a nonempty array of rows");
    const size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) config_error("field '" + key + "' rows must be nonempty arrays");
    Matrix out(v.size(), cols);
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_array() || v[i].size() != cols)
            config_error("field '" + key + "' rows must all have " + std::to_string(cols) + " entries");
        for (size_t j = 0; j < cols; ++j) out(i, j) = as_number(v[i][j], key);
    }
    return out;
}

std::vector<int> parse_index_set(const json& v, const std::string& key, int limit) {
    if (!v.is_array() || v.empty()) config_error("field '" + key + "' entries must be nonempty index arrays");
    std::vector<int> out;
    for (const auto& e : v) {
        const int idx = as_int(e, key);
        if (idx < 0 || idx >= limit)
            config_error("field '" + key + "' contains index " + std::to_string(idx) +
                         ", valid range is [0, " + std::to_string(limit - 1) + "]");
        out.push_back(idx);
    }
    std::vector<int> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        config_error("field '" + key + "' contains a duplicate index");
    return out;
}

std::string join_indices(const std::vector<int>& idx) {
    std::string out;
    for (size_t i = 0; i < idx.size(); ++i) {
        if (i) out += '+';
        out += std::to_string(idx[i]);
    }
    return out;
}

std::string join_meta(const std::vector<RowMeta>& meta) {
    std::string out;
    for (size_t i = 0; i < meta.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(meta[i].time_index) + ':' + std::to_string(meta[i].output_index);
    }
    return out;
}

json json_number(double v) {
    if (std::isfinite(v)) return json(v);
    return json(v > 0 ? "inf" : "-inf");
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        config_error(std::string("parse error: ") + e.what());
    }

    ExperimentConfig cfg;

    const json& sys = require(j, "system");
    if (sys.contains("builtin")) {
        const std::string name = sys.at("builtin").get<std::string>();
        if (name != "fly" && name != "fly_model") config_error("unknown builtin system '" + name + "'");
        cfg.use_fly_model = true;
    } else {
        cfg.A = parse_matrix(require(sys, "A"), "system.A");
        if (cfg.A.rows() != cfg.A.cols()) config_error("field 'system.A' must be square");
        if (sys.contains("C")) {
            cfg.C = parse_matrix(sys.at("C"), "system.C");
            if (cfg.C.cols() != cfg.A.rows()) config_error("field 'system.C' must have n columns");
        }
        const std::string kind = require(sys, "time_kind").get<std::string>();
        if (kind == "continuous") {
            cfg.time_kind = TimeKind::ContinuousTime;
        } else if (kind == "discrete") {
            cfg.time_kind = TimeKind::DiscreteTime;
        } else {
            config_error("field 'system.time_kind' must be \"continuous\" or \"discrete\"");
        }
    }

    cfg.dt = as_number(require(j, "dt"), "dt");
    if (cfg.dt <= 0.0) config_error("field 'dt' must be positive");
    cfg.duration = as_number(require(j, "duration"), "duration");
    if (cfg.duration <= 0.0) config_error("field 'duration' must be positive");
    cfg.x0 = parse_vector(require(j, "x0"), "x0");
    cfg.window = as_int(require(j, "window"), "window");
    if (cfg.window < 1) config_error("field 'window' must be >= 1");
    cfg.epsilon = j.contains("epsilon") ? as_number(j.at("epsilon"), "epsilon") : 1e-3;
    if (cfg.epsilon <= 0.0) config_error("field 'epsilon' must be positive");

    const json& ep = require(j, "eiso");
    cfg.eiso.alpha = as_number(require(ep, "alpha"), "eiso.alpha");
    cfg.eiso.beta = as_number(require(ep, "beta"), "eiso.beta");
    cfg.eiso.sigma0 = as_number(require(ep, "sigma0"), "eiso.sigma0");
    if (cfg.eiso.alpha < 0.0) config_error("field 'eiso.alpha' must be nonnegative");
    if (cfg.eiso.beta <= 0.0 || cfg.eiso.beta >= 1.0) config_error("field 'eiso.beta' must lie in (0, 1)");
    if (cfg.eiso.sigma0 <= 0.0) config_error("field 'eiso.sigma0' must be positive");
    if (ep.contains("max_iterations")) {
        cfg.eiso.max_iterations = as_int(ep.at("max_iterations"), "eiso.max_iterations");
        if (cfg.eiso.max_iterations < 1) config_error("field 'eiso.max_iterations' must be >= 1");
    }
    if (j.contains("solver")) {
        const json& sv = j.at("solver");
        if (sv.contains("abs_tol")) cfg.eiso.solver.abs_tol = as_number(sv.at("abs_tol"), "solver.abs_tol");
        if (sv.contains("rel_tol")) cfg.eiso.solver.rel_tol = as_number(sv.at("rel_tol"), "solver.rel_tol");
        if (sv.contains("max_iterations"))
            cfg.eiso.solver.max_iterations = as_int(sv.at("max_iterations"), "solver.max_iterations");
        if (cfg.eiso.solver.abs_tol <= 0.0 || cfg.eiso.solver.rel_tol < 0.0 ||
            cfg.eiso.solver.max_iterations < 1)
            config_error("field 'solver' has out-of-range entries");
    }

    // dimensions for index validation
    const int n = cfg.use_fly_model ? 5 : static_cast<int>(cfg.A.rows());
    const int p = cfg.use_fly_model ? 3 : static_cast<int>(cfg.C.rows());
    const int m = cfg.use_fly_model ? 2 : 0;

    if (cfg.x0.size() != n)
        config_error("field 'x0' has " + std::to_string(cfg.x0.size()) + " entries, expected " +
                     std::to_string(n));

    if (j.contains("input_schedule")) {
        const json& segs = j.at("input_schedule");
        if (!segs.is_array()) config_error("field 'input_schedule' must be an array of segments");
        for (const auto& s : segs) {
            InputSegment seg;
            seg.value = parse_vector(require(s, "value"), "input_schedule.value");
            if (seg.value.size() != m)
                config_error("field 'input_schedule.value' has " + std::to_string(seg.value.size()) +
                             " entries, expected " + std::to_string(m));
            seg.duration = as_number(require(s, "duration"), "input_schedule.duration");
            if (seg.duration <= 0.0) config_error("field 'input_schedule.duration' must be positive");
            cfg.input_schedule.push_back(std::move(seg));
        }
    }

    if (j.contains("targets")) {
        const json& ts = j.at("targets");
        if (!ts.is_array() || ts.empty()) config_error("field 'targets' must be a nonempty array of index sets");
        for (const auto& t : ts) cfg.targets.push_back(parse_index_set(t, "targets", n));
    } else {
        for (int i = 0; i < n; ++i) cfg.targets.push_back({i});
    }

    if (j.contains("sensor_subsets")) {
        const json& ss = j.at("sensor_subsets");
        if (!ss.is_array() || ss.empty())
            config_error("field 'sensor_subsets' must be a nonempty array of index sets");
        for (const auto& s : ss) {
            std::vector<int> subset = parse_index_set(s, "sensor_subsets", p);
            std::sort(subset.begin(), subset.end());
            cfg.sensor_subsets.push_back(std::move(subset));
        }
    }

    if (j.contains("output_scales")) {
        const Vector scales = parse_vector(j.at("output_scales"), "output_scales");
        if (scales.size() != p)
            config_error("field 'output_scales' has " + std::to_string(scales.size()) +
                         " entries, expected " + std::to_string(p));
        if ((scales.array() <= 0.0).any()) config_error("field 'output_scales' entries must be positive");
        cfg.output_scales.assign(scales.data(), scales.data() + scales.size());
    }

    if (j.contains("sensor_sets")) {
        const json& sets = j.at("sensor_sets");
        if (!sets.is_array() || sets.empty())
            config_error("field 'sensor_sets' must be a nonempty array");
        for (const auto& s : sets) {
            SensorSet set;
            set.name = require(s, "name").get<std::string>();
            set.C = parse_matrix(require(s, "C"), "sensor_sets.C");
            if (set.C.cols() != n) config_error("field 'sensor_sets.C' must have n columns");
            cfg.sensor_sets.push_back(std::move(set));
        }
    }

    if (cfg.window > cfg.samples())
        config_error("field 'window' (" + std::to_string(cfg.window) +
                     ") exceeds the trajectory length of " + std::to_string(cfg.samples()) + " samples");

    return cfg;
}

SystemModel ExperimentConfig::make_system() const {
    if (use_fly_model) return fly_model();
    Matrix Cmat = C;
    if (Cmat.size() == 0) Cmat = Matrix::Identity(A.rows(), A.cols());
    return linear_system(A, Cmat, time_kind);
}

int ExperimentConfig::samples() const { return static_cast<int>(std::llround(duration / dt)); }

InputSchedule ExperimentConfig::make_schedule() const {
    const int steps = samples() - 1;
    const int m = use_fly_model ? 2 : 0;
    if (input_schedule.empty()) return InputSchedule::zeros(m, steps, dt);

    InputSchedule schedule;
    schedule.dt = dt;
    for (const InputSegment& seg : input_schedule) {
        const int seg_steps = static_cast<int>(std::llround(seg.duration / dt));
        for (int k = 0; k < seg_steps && static_cast<int>(schedule.values.size()) < steps; ++k)
            schedule.values.push_back(seg.value);
    }
    if (static_cast<int>(schedule.values.size()) < steps)
        config_error("input_schedule covers " + std::to_string(schedule.values.size()) + " of " +
                     std::to_string(steps) + " steps");
    return schedule;
}

namespace {

void apply_output_scales(EmpiricalObservabilityMatrix& M, const std::vector<double>& scales) {
    if (scales.empty()) return;
    for (int i = 0; i < M.rows(); ++i) M.entries.row(i) *= scales[M.row_meta[i].output_index];
}

EmpiricalObservabilityMatrix filter_by_subset(const EmpiricalObservabilityMatrix& M,
                                              const std::vector<int>& subset) {
    std::vector<int> keep;
    for (int i = 0; i < M.rows(); ++i)
        if (std::find(subset.begin(), subset.end(), M.row_meta[i].output_index) != subset.end())
            keep.push_back(i);

    EmpiricalObservabilityMatrix out;
    out.entries.resize(keep.size(), M.states());
    out.row_meta.resize(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
        out.entries.row(i) = M.entries.row(keep[i]);
        out.row_meta[i] = M.row_meta[keep[i]];
    }
    out.epsilon = M.epsilon;
    out.dt = M.dt;
    out.x0 = M.x0;
    return out;
}

WindowResult summarize_run(const EisoResult& res, const EmpiricalObservabilityMatrix& M,
                           int anchor, double anchor_time, int subset_id,
                           const std::vector<int>& target_set) {
    WindowResult row;
    row.anchor_index = anchor;
    row.anchor_time = anchor_time;
    row.subset_id = subset_id;
    row.target_set = target_set;
    row.kappa_min = res.kappa_min;
    row.observable = res.observable;
    row.iterations_used = static_cast<int>(res.iterations.size());
    if (res.observable) {
        const IterationRecord* best = nullptr;
        for (const IterationRecord& rec : res.iterations)
            if (!best || rec.kappa_squared < best->kappa_squared) best = &rec;
        for (int r : best->cumulative_rows) row.rows_used.push_back(M.row_meta[r]);
    }
    return row;
}

std::vector<IterationTrace> trace_run(const EisoResult& res, const EmpiricalObservabilityMatrix& M,
                                      int anchor, int subset_id, const std::vector<int>& target_set) {
    std::vector<IterationTrace> traces;
    for (const IterationRecord& rec : res.iterations) {
        IterationTrace t;
        t.anchor_index = anchor;
        t.subset_id = subset_id;
        t.target_set = target_set;
        t.iteration = rec.iteration;
        t.kappa_squared = rec.kappa_squared;
        for (int r : rec.new_rows) t.new_rows.push_back(M.row_meta[r]);
        t.retained_count = static_cast<int>(rec.retained_singular_values.size());
        traces.push_back(std::move(t));
    }
    return traces;
}

std::vector<std::vector<int>> effective_subsets(const ExperimentConfig& cfg, int p) {
    if (!cfg.sensor_subsets.empty()) return cfg.sensor_subsets;
    std::vector<int> all(p);
    for (int s = 0; s < p; ++s) all[s] = s;
    return {all};
}

struct GridCell {
    WindowResult window;
    std::vector<IterationTrace> traces;
};

[[noreturn]] void rethrow_annotated(const std::exception_ptr& ep, int anchor, double anchor_time) {
    const std::string where =
        "window " + std::to_string(anchor) + " (t=" + format_float(anchor_time) + "s): ";
    try {
        std::rethrow_exception(ep);
    } catch (const SolverError& e) {
        throw SolverError(where + e.what());
    } catch (const NumericError& e) {
        throw NumericError(where + e.what());
    }
}

}  // namespace

namespace ref {

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const SystemModel system = cfg.make_system();
    const InputSchedule schedule = cfg.make_schedule();
    const Trajectory nominal = simulate(system, cfg.x0, schedule, cfg.samples());

    std::vector<EmpiricalObservabilityMatrix> windows =
        ref::sliding_windows(system, nominal, schedule, cfg.window, cfg.epsilon);
    for (auto& w : windows) apply_output_scales(w, cfg.output_scales);

    ExperimentReport report;
    report.sensor_subsets = effective_subsets(cfg, system.p);

    for (size_t t = 0; t < windows.size(); ++t) {
        const double anchor_time = static_cast<double>(t) * cfg.dt;
        for (size_t s = 0; s < report.sensor_subsets.size(); ++s) {
            const EmpiricalObservabilityMatrix filtered =
                filter_by_subset(windows[t], report.sensor_subsets[s]);
            const GramianMeasures g = empirical_gramian(filtered, cfg.eiso.sigma0);
            report.gramian_summary.push_back(WindowGramian{static_cast<int>(t), static_cast<int>(s),
                                                           g.estimation_condition_number,
                                                           g.unobservability_index});
            for (const std::vector<int>& target : cfg.targets) {
                const EisoResult res = eiso::run(filtered, target, cfg.eiso);
                report.per_window.push_back(summarize_run(res, filtered, static_cast<int>(t),
                                                          anchor_time, static_cast<int>(s), target));
                for (auto& tr : trace_run(res, filtered, static_cast<int>(t), static_cast<int>(s), target))
                    report.iterations.push_back(std::move(tr));
            }
        }
    }
    return report;
}

SensorStudyReport sensor_selection_study(const ExperimentConfig& cfg) {
    if (cfg.sensor_sets.empty())
        throw std::invalid_argument("config: missing field 'sensor_sets' for the sensor study");
    if (cfg.use_fly_model)
        throw std::invalid_argument("config: the sensor study requires an inline linear system");

    SensorStudyReport report;
    const int n = static_cast<int>(cfg.A.rows());
    for (size_t i = 0; i < cfg.sensor_sets.size(); ++i) {
        const SensorSet& set = cfg.sensor_sets[i];
        const SystemModel system = linear_system(cfg.A, set.C, cfg.time_kind);
        const InputSchedule schedule = InputSchedule::zeros(0, cfg.window - 1, cfg.dt);
        const EmpiricalObservabilityMatrix M =
            build_matrix(system, cfg.x0, schedule, cfg.window, cfg.epsilon, 1);

        SensorSetResult r;
        r.set_id = static_cast<int>(i);
        r.name = set.name;
        r.gramian_condition_number = empirical_gramian(M, cfg.eiso.sigma0).estimation_condition_number;
        for (int j = 0; j < n; ++j) {
            const EisoResult res = eiso::run(M, j, cfg.eiso);
            r.kappa_min.push_back(res.kappa_min);
            r.observable.push_back(res.observable);
        }
        report.sets.push_back(std::move(r));
    }

    // log-log correlation against the least observable state
    std::vector<double> xs, ys;
    for (const SensorSetResult& r : report.sets) {
        const double worst = *std::max_element(r.kappa_min.begin(), r.kappa_min.end());
        if (std::isfinite(r.gramian_condition_number) && std::isfinite(worst)) {
            xs.push_back(std::log10(r.gramian_condition_number));
            ys.push_back(std::log10(worst));
        }
    }
    report.regression_points = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
        const double nn = static_cast<double>(xs.size());
        double mx = 0, my = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= nn;
        my /= nn;
        double sxy = 0, sxx = 0, syy = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        if (sxx > 0.0 && syy > 0.0) report.log_log_r_squared = (sxy * sxy) / (sxx * syy);
    }
    return report;
}

}  // namespace ref

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
    const SystemModel system = cfg.make_system();
    const InputSchedule schedule = cfg.make_schedule();
    const Trajectory nominal = simulate(system, cfg.x0, schedule, cfg.samples());

    std::vector<EmpiricalObservabilityMatrix> windows =
        sliding_windows(system, nominal, schedule, cfg.window, cfg.epsilon, threads);
    for (auto& w : windows) apply_output_scales(w, cfg.output_scales);

    ExperimentReport report;
    report.sensor_subsets = effective_subsets(cfg, system.p);

    const int n_windows = static_cast<int>(windows.size());
    const int n_subsets = static_cast<int>(report.sensor_subsets.size());
    const int n_targets = static_cast<int>(cfg.targets.size());

    // Pre-filter each (window, subset) pair, then run the full task grid in
    // parallel with results landing in preallocated slots.
    std::vector<EmpiricalObservabilityMatrix> filtered(n_windows * n_subsets);
    std::vector<WindowGramian> gramians(n_windows * n_subsets);
    for (int t = 0; t < n_windows; ++t) {
        for (int s = 0; s < n_subsets; ++s) {
            EmpiricalObservabilityMatrix f = filter_by_subset(windows[t], report.sensor_subsets[s]);
            const GramianMeasures g = empirical_gramian(f, cfg.eiso.sigma0);
            gramians[t * n_subsets + s] =
                WindowGramian{t, s, g.estimation_condition_number, g.unobservability_index};
            filtered[t * n_subsets + s] = std::move(f);
        }
    }

    const int n_tasks = n_windows * n_subsets * n_targets;
    std::vector<GridCell> cells(n_tasks);
    const int nthreads = resolve_threads(threads);
    std::exception_ptr failure;
    int failure_anchor = 0;

#pragma omp parallel for num_threads(nthreads) schedule(dynamic)
    for (int task = 0; task < n_tasks; ++task) {
        const int t = task / (n_subsets * n_targets);
        const int s = (task / n_targets) % n_subsets;
        const int g = task % n_targets;
        try {
            const EmpiricalObservabilityMatrix& M = filtered[t * n_subsets + s];
            const EisoResult res = eiso::run(M, cfg.targets[g], cfg.eiso);
            cells[task].window =
                summarize_run(res, M, t, static_cast<double>(t) * cfg.dt, s, cfg.targets[g]);
            cells[task].traces = trace_run(res, M, t, s, cfg.targets[g]);
        } catch (...) {
#pragma omp critical
            if (!failure) {
                failure = std::current_exception();
                failure_anchor = t;
            }
        }
    }
    if (failure) rethrow_annotated(failure, failure_anchor, failure_anchor * cfg.dt);

    report.gramian_summary = std::move(gramians);
    for (GridCell& cell : cells) {
        report.per_window.push_back(std::move(cell.window));
        for (auto& tr : cell.traces) report.iterations.push_back(std::move(tr));
    }
    return report;
}

SensorStudyReport sensor_selection_study(const ExperimentConfig& cfg, int threads) {
    if (cfg.sensor_sets.empty())
        throw std::invalid_argument("config: missing field 'sensor_sets' for the sensor study");
    if (cfg.use_fly_model)
        throw std::invalid_argument("config: the sensor study requires an inline linear system");

    // The per-set work is tiny; parallelize across sets and keep everything
    // else identical to the serial reference.
    const int n_sets = static_cast<int>(cfg.sensor_sets.size());
    std::vector<SensorSetResult> results(n_sets);
    const int nthreads = resolve_threads(threads);
    std::exception_ptr failure;

#pragma omp parallel for num_threads(nthreads) schedule(dynamic)
    for (int i = 0; i < n_sets; ++i) {
        try {
            const SensorSet& set = cfg.sensor_sets[i];
            const SystemModel system = linear_system(cfg.A, set.C, cfg.time_kind);
            const InputSchedule schedule = InputSchedule::zeros(0, cfg.window - 1, cfg.dt);
            const EmpiricalObservabilityMatrix M =
                ref::build_matrix(system, cfg.x0, schedule, cfg.window, cfg.epsilon);

            SensorSetResult r;
            r.set_id = i;
            r.name = set.name;
            r.gramian_condition_number =
                empirical_gramian(M, cfg.eiso.sigma0).estimation_condition_number;
            for (int j = 0; j < static_cast<int>(cfg.A.rows()); ++j) {
                const EisoResult res = eiso::run(M, j, cfg.eiso);
                r.kappa_min.push_back(res.kappa_min);
                r.observable.push_back(res.observable);
            }
            results[i] = std::move(r);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    SensorStudyReport report;
    report.sets = std::move(results);

    std::vector<double> xs, ys;
    for (const SensorSetResult& r : report.sets) {
        const double worst = *std::max_element(r.kappa_min.begin(), r.kappa_min.end());
        if (std::isfinite(r.gramian_condition_number) && std::isfinite(worst)) {
            xs.push_back(std::log10(r.gramian_condition_number));
            ys.push_back(std::log10(worst));
        }
    }
    report.regression_points = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
        const double nn = static_cast<double>(xs.size());
        double mx = 0, my = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= nn;
        my /= nn;
        double sxy = 0, sxx = 0, syy = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        if (sxx > 0.0 && syy > 0.0) report.log_log_r_squared = (sxy * sxy) / (sxx * syy);
    }
    return report;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plot_data: cannot open " + path.string());
    return out;
}

}  // namespace

void emit_plot_data(const ExperimentReport& report, const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    std::ofstream win = open_out(dir / "windows.csv");
    win << "anchor_index,anchor_time,sensor_subset,target_set,kappa_min,observable,"
           "iterations_used,rows_used,gramian_condition_number,unobservability_index\n";
    for (const WindowResult& r : report.per_window) {
        const WindowGramian* g = nullptr;
        for (const WindowGramian& cand : report.gramian_summary)
            if (cand.anchor_index == r.anchor_index && cand.subset_id == r.subset_id) {
                g = &cand;
                break;
            }
        win << r.anchor_index << ',' << format_float(r.anchor_time) << ','
            << join_indices(report.sensor_subsets[r.subset_id]) << ',' << join_indices(r.target_set)
            << ',' << format_float(r.kappa_min) << ',' << (r.observable ? 1 : 0) << ','
            << r.iterations_used << ',' << join_meta(r.rows_used) << ','
            << format_float(g ? g->estimation_condition_number : kInf) << ','
            << format_float(g ? g->unobservability_index : kInf) << '\n';
    }

    std::ofstream it = open_out(dir / "iterations.csv");
    it << "anchor_index,sensor_subset,target_set,iteration,kappa_squared,new_rows,retained_count\n";
    for (const IterationTrace& t : report.iterations) {
        it << t.anchor_index << ',' << join_indices(report.sensor_subsets[t.subset_id]) << ','
           << join_indices(t.target_set) << ',' << t.iteration << ',' << format_float(t.kappa_squared)
           << ',' << join_meta(t.new_rows) << ',' << t.retained_count << '\n';
    }

    json j;
    j["sensor_subsets"] = report.sensor_subsets;
    j["windows"] = json::array();
    for (const WindowResult& r : report.per_window) {
        json row;
        row["anchor_index"] = r.anchor_index;
        row["anchor_time"] = r.anchor_time;
        row["sensor_subset"] = report.sensor_subsets[r.subset_id];
        row["target_set"] = r.target_set;
        row["kappa_min"] = json_number(r.kappa_min);
        row["observable"] = r.observable;
        row["iterations_used"] = r.iterations_used;
        json rows = json::array();
        for (const RowMeta& m : r.rows_used) rows.push_back({m.time_index, m.output_index});
        row["rows_used"] = rows;
        j["windows"].push_back(std::move(row));
    }
    j["gramians"] = json::array();
    for (const WindowGramian& g : report.gramian_summary) {
        json row;
        row["anchor_index"] = g.anchor_index;
        row["sensor_subset"] = report.sensor_subsets[g.subset_id];
        row["estimation_condition_number"] = json_number(g.estimation_condition_number);
        row["unobservability_index"] = json_number(g.unobservability_index);
        j["gramians"].push_back(std::move(row));
    }
    j["iterations"] = json::array();
    for (const IterationTrace& t : report.iterations) {
        json row;
        row["anchor_index"] = t.anchor_index;
        row["sensor_subset"] = report.sensor_subsets[t.subset_id];
        row["target_set"] = t.target_set;
        row["iteration"] = t.iteration;
        row["kappa_squared"] = json_number(t.kappa_squared);
        json rows = json::array();
        for (const RowMeta& m : t.new_rows) rows.push_back({m.time_index, m.output_index});
        row["new_rows"] = rows;
        row["retained_count"] = t.retained_count;
        j["iterations"].push_back(std::move(row));
    }
    std::ofstream rep = open_out(dir / "report.json");
    rep << j.dump(2) << '\n';
}

void emit_plot_data(const SensorStudyReport& report, const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    std::ofstream csv = open_out(dir / "sensors.csv");
    csv << "set_id,name,gramian_condition_number,state,kappa_min,observable\n";
    for (const SensorSetResult& r : report.sets)
        for (size_t j = 0; j < r.kappa_min.size(); ++j)
            csv << r.set_id << ',' << r.name << ',' << format_float(r.gramian_condition_number) << ','
                << j << ',' << format_float(r.kappa_min[j]) << ',' << (r.observable[j] ? 1 : 0)
                << '\n';

    json j;
    j["r_squared"] = report.log_log_r_squared;
    j["regression_points"] = report.regression_points;
    j["sets"] = json::array();
    for (const SensorSetResult& r : report.sets) {
        json row;
        row["set_id"] = r.set_id;
        row["name"] = r.name;
        row["gramian_condition_number"] = json_number(r.gramian_condition_number);
        json kappas = json::array();
        for (double k : r.kappa_min) kappas.push_back(json_number(k));
        row["kappa_min"] = kappas;
        row["observable"] = r.observable;
        j["sets"].push_back(std::move(row));
    }
    std::ofstream rep = open_out(dir / "report.json");
    rep << j.dump(2) << '\n';
}

}  // namespace eiso
