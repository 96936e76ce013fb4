// Compares the OpenMP kernels against the serial reference implementations
// on representative workloads and reports timings and speedups.

#include <chrono>
#include <cstdio>
#include <string>

#include "eiso/experiment.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
    const auto start = clock_type::now();
    fn();
    return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

eiso::ExperimentConfig fly_workload(double duration) {
    eiso::ExperimentConfig cfg;
    cfg.use_fly_model = true;
    cfg.dt = 0.1;
    cfg.duration = duration;
    cfg.x0 = eiso::Vector(5);
    cfg.x0 << 1.2, 1.0, 0.6, 0.0, 2.0;
    cfg.input_schedule.push_back({(eiso::Vector(2) << 0.0, 0.0).finished(), duration / 4});
    cfg.input_schedule.push_back({(eiso::Vector(2) << 0.0, 3.0).finished(), duration / 4});
    cfg.input_schedule.push_back({(eiso::Vector(2) << 0.8, 0.0).finished(), duration / 4});
    cfg.input_schedule.push_back({(eiso::Vector(2) << 0.0, -2.0).finished(), duration / 4});
    cfg.window = 3;
    cfg.epsilon = 1e-3;
    cfg.eiso.alpha = 1e-6;
    cfg.eiso.beta = 1e-3;
    cfg.eiso.sigma0 = 1e-8;
    for (int i = 0; i < 5; ++i) cfg.targets.push_back({i});
    return cfg;
}

void report(const char* label, double serial_ms, double parallel_ms, int threads) {
    std::printf("%-34s serial %9.1f ms   %2d threads %9.1f ms   speedup %.2fx\n", label, serial_ms,
                threads, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = (argc > 1) ? std::stoi(argv[1]) : 0;
    const int used = eiso::resolve_threads(threads);
    std::printf("benchmarking with %d threads (pass a count as argv[1] to override)\n\n", used);

    {
        const eiso::ExperimentConfig cfg = fly_workload(60.0);
        const eiso::SystemModel system = cfg.make_system();
        const eiso::InputSchedule schedule = cfg.make_schedule();
        const eiso::Trajectory nominal = eiso::simulate(system, cfg.x0, schedule, cfg.samples());

        double serial_ms = time_ms([&] {
            auto windows = eiso::ref::sliding_windows(system, nominal, schedule, cfg.window, cfg.epsilon);
            (void)windows;
        });
        double parallel_ms = time_ms([&] {
            auto windows =
                eiso::sliding_windows(system, nominal, schedule, cfg.window, cfg.epsilon, threads);
            (void)windows;
        });
        report("sliding windows (598 anchors)", serial_ms, parallel_ms, used);
    }

    {
        const eiso::ExperimentConfig cfg = fly_workload(30.0);
        double serial_ms = time_ms([&] { (void)eiso::ref::run_experiment(cfg); });
        double parallel_ms = time_ms([&] { (void)eiso::run_experiment(cfg, threads); });
        report("selection grid (298 x 5 tasks)", serial_ms, parallel_ms, used);
    }

    {
        // single-window selection on a wide 3-state system, one task per state
        eiso::ExperimentConfig cfg;
        cfg.A = (eiso::Matrix(3, 3) << 0.0, 1.0, 0.0, -2.0, 0.0, 1.0, 1.0, 0.0, -1.0).finished();
        cfg.C = (eiso::Matrix(3, 3) << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0).finished();
        cfg.time_kind = eiso::TimeKind::ContinuousTime;
        cfg.dt = 0.01;
        cfg.duration = 1.0;
        cfg.x0 = (eiso::Vector(3) << 1.0, 1.0, 1.0).finished();
        cfg.window = 100;
        cfg.epsilon = 1e-3;
        cfg.eiso.alpha = 1e-2;
        cfg.eiso.beta = 1e-3;
        cfg.eiso.sigma0 = 1e-6;
        cfg.targets = {{0}, {1}, {2}, {0, 1, 2}};

        double serial_ms = time_ms([&] { (void)eiso::ref::run_experiment(cfg); });
        double parallel_ms = time_ms([&] { (void)eiso::run_experiment(cfg, threads); });
        report("deep selection (300-row window)", serial_ms, parallel_ms, used);
    }

    return 0;
}
