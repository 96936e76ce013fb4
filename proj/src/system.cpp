#include "eiso/system.hpp"

namespace eiso {

InputSchedule InputSchedule::zeros(int m, int count, double dt) {
    if (m < 0 || count < 0 || dt <= 0.0) throw std::invalid_argument("InputSchedule::zeros: bad arguments");
    return InputSchedule{std::vector<Vector>(count, Vector::Zero(m)), dt};
}

InputSchedule InputSchedule::constant(const Vector& u, int count, double dt) {
    if (count < 0 || dt <= 0.0) throw std::invalid_argument("InputSchedule::constant: bad arguments");
    return InputSchedule{std::vector<Vector>(count, u), dt};
}

InputSchedule InputSchedule::slice(int first, int count) const {
    if (first < 0 || count < 0 || first + count > static_cast<int>(values.size()))
        throw std::invalid_argument("InputSchedule::slice: range out of bounds");
    return InputSchedule{std::vector<Vector>(values.begin() + first, values.begin() + first + count), dt};
}

namespace {

void check_finite(const Vector& v, const char* what, int step) {
    if (!v.allFinite())
        throw NumericError(std::string(what) + " produced a non-finite value at step " + std::to_string(step));
}

Vector eval_output(const SystemModel& system, const Vector& x, int step) {
    Vector y = system.output_map(x);
    if (y.size() != system.p)
        throw std::invalid_argument("output_map returned " + std::to_string(y.size()) +
                                    " values, expected " + std::to_string(system.p));
    check_finite(y, "output_map", step);
    return y;
}

// Classical RK4 step of xdot = f(x, u), u held constant (zero-order hold).
Vector rk4_step(const SystemModel& system, const Vector& x, const Vector& u, double dt) {
    const Vector k1 = system.dynamics(x, u);
    const Vector k2 = system.dynamics(x + (0.5 * dt) * k1, u);
    const Vector k3 = system.dynamics(x + (0.5 * dt) * k2, u);
    const Vector k4 = system.dynamics(x + dt * k3, u);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory simulate(const SystemModel& system, const Vector& x0,
                    const InputSchedule& inputs, int samples) {
    if (x0.size() != system.n)
        throw std::invalid_argument("simulate: x0 has dimension " + std::to_string(x0.size()) +
                                    ", expected " + std::to_string(system.n));
    if (samples < 1) throw std::invalid_argument("simulate: samples must be positive");
    if (samples > static_cast<int>(inputs.values.size()) + 1)
        throw std::invalid_argument("simulate: schedule provides " + std::to_string(inputs.values.size()) +
                                    " steps, need " + std::to_string(samples - 1));
    if (inputs.dt <= 0.0) throw std::invalid_argument("simulate: dt must be positive");

    Trajectory traj;
    traj.dt = inputs.dt;
    traj.states.reserve(samples);
    traj.outputs.reserve(samples);

    Vector x = x0;
    for (int k = 0; k < samples; ++k) {
        traj.states.push_back(x);
        traj.outputs.push_back(eval_output(system, x, k));
        if (k + 1 == samples) break;

        const Vector& u = inputs.values[k];
        if (u.size() != system.m)
            throw std::invalid_argument("simulate: input at step " + std::to_string(k) + " has dimension " +
                                        std::to_string(u.size()) + ", expected " + std::to_string(system.m));
        x = (system.time_kind == TimeKind::DiscreteTime) ? system.dynamics(x, u)
                                                         : rk4_step(system, x, u, inputs.dt);
        check_finite(x, "dynamics", k + 1);
    }
    return traj;
}

SystemModel linear_system(const Matrix& A, const Matrix& C, TimeKind time_kind) {
    if (A.rows() != A.cols()) throw std::invalid_argument("linear_system: A must be square");
    if (C.cols() != A.rows()) throw std::invalid_argument("linear_system: C must have n columns");

    SystemModel sys;
    sys.n = static_cast<int>(A.rows());
    sys.m = 0;
    sys.p = static_cast<int>(C.rows());
    sys.time_kind = time_kind;
    sys.output_kinds.assign(sys.p, OutputKind::Linear);
    sys.dynamics = [A](const Vector& x, const Vector&) -> Vector { return A * x; };
    sys.output_map = [C](const Vector& x) -> Vector { return C * x; };
    return sys;
}

SystemModel fly_model() {
    SystemModel sys;
    sys.n = 5;
    sys.m = 2;
    sys.p = 3;
    sys.time_kind = TimeKind::ContinuousTime;
    sys.output_kinds = {OutputKind::Angular, OutputKind::Linear, OutputKind::Angular};
    // state (d, g, w, phi, zeta), inputs (u_g, u_phi)
    sys.dynamics = [](const Vector&, const Vector& u) -> Vector {
        Vector dx = Vector::Zero(5);
        dx[1] = u[0];
        dx[3] = u[1];
        return dx;
    };
    sys.output_map = [](const Vector& x) -> Vector {
        const double d = x[0], g = x[1], w = x[2], phi = x[3], zeta = x[4];
        if (d == 0.0) throw NumericError("fly model: optic flow undefined at altitude d = 0");
        const double ax = -g * std::cos(phi) + w * std::cos(zeta);
        const double ay = -g * std::sin(phi) + w * std::sin(zeta);
        if (ax == 0.0 && ay == 0.0)
            throw NumericError("fly model: airspeed angle undefined, airspeed vector is zero");
        Vector y(3);
        y[0] = phi;
        y[1] = g / d;
        y[2] = std::atan2(ay, ax);
        return y;
    };
    return sys;
}

}  // namespace eiso
