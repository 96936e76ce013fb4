#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "eiso/common.hpp"

namespace eiso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class TimeKind { ContinuousTime, DiscreteTime };

/// Linear outputs live on the real line; Angular outputs live on the circle
/// (radians) and need branch-cut-aware differencing.
enum class OutputKind { Linear, Angular };

/// A simulatable dynamical system. For continuous systems `dynamics` is the
/// vector field f(x, u); for discrete systems it is the one-step transition
/// map. Both maps must be deterministic. Immutable after construction and
/// safe to share across concurrent simulations.
struct SystemModel {
    int n = 0;  // state dimension
    int m = 0;  // input dimension
    int p = 0;  // output dimension
    TimeKind time_kind = TimeKind::ContinuousTime;
    std::function<Vector(const Vector&, const Vector&)> dynamics;
    std::function<Vector(const Vector&)> output_map;
    std::vector<OutputKind> output_kinds;  // length p
};

/// Per-step inputs u_0, ..., u_{w-2} (piecewise constant over each step of
/// length dt).
struct InputSchedule {
    std::vector<Vector> values;
    double dt = 0.0;

    static InputSchedule zeros(int m, int count, double dt);
    static InputSchedule constant(const Vector& u, int count, double dt);

    /// Sub-schedule of `count` steps starting at step `first`.
    InputSchedule slice(int first, int count) const;
};

struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> outputs;  // outputs[k] = h(states[k])
    double dt = 0.0;

    int samples() const { return static_cast<int>(states.size()); }
};

/// Simulates `samples` consecutive output samples starting from x0.
/// states[0] = x0; discrete systems advance via the transition map, and
/// continuous systems via fixed-step classical RK4 over dt with the input
/// held constant on each step. Requires samples <= values.size() + 1.
/// Throws NumericError if the model produces a non-finite value.
Trajectory simulate(const SystemModel& system, const Vector& x0,
                    const InputSchedule& inputs, int samples);

/// Autonomous linear system x -> Ax with output x -> Cx (all outputs Linear).
SystemModel linear_system(const Matrix& A, const Matrix& C, TimeKind time_kind);

/// Planar flight model with state (d, g, w, phi, zeta): altitude, ground
/// speed, ambient wind speed, heading and wind direction. Inputs (u_g,
/// u_phi) directly steer ground speed and heading; d, w, zeta are constant.
/// Outputs: heading phi, optic flow g/d, and the global-frame airspeed angle
///   gamma = atan2(-g sin(phi) + w sin(zeta), -g cos(phi) + w cos(zeta)).
/// The output map throws NumericError at d = 0 and at zero airspeed.
SystemModel fly_model();

}  // namespace eiso
