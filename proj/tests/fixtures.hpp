#pragma once

// Shared fixtures: the two linear benchmark systems and a handful of small
// matrices with known selection behavior.

#include "eiso/system.hpp"

namespace fixtures {

/// Fully observable 3-state continuous system with three mixed outputs.
inline eiso::Matrix dense3_A() {
    return (eiso::Matrix(3, 3) << 0.0, 1.0, 0.0, -2.0, 0.0, 1.0, 1.0, 0.0, -1.0).finished();
}

inline eiso::Matrix dense3_C() {
    return (eiso::Matrix(3, 3) << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0).finished();
}

inline eiso::SystemModel dense3_system() {
    return eiso::linear_system(dense3_A(), dense3_C(), eiso::TimeKind::ContinuousTime);
}

/// Discrete 3-state system whose dynamics decouple states {0,1} from state 2.
inline eiso::Matrix decay3_A() {
    return (eiso::Matrix(3, 3) << 0.9952, 0.095, 0.0, -0.095, 0.9002, 0.0, 0.0, 0.0, 0.9048)
        .finished();
}

inline eiso::SystemModel decay3_system(const eiso::Matrix& C) {
    return eiso::linear_system(decay3_A(), C, eiso::TimeKind::DiscreteTime);
}

/// 2x2 matrices with contrasting single-state estimability, plus the
/// nearly-rank-one variant whose second column is at roundoff scale.
inline eiso::Matrix diag_scaled2() {
    return (eiso::Matrix(2, 2) << 1.0, 0.0, 0.0, 10.0).finished();
}

inline eiso::Matrix chained2() { return (eiso::Matrix(2, 2) << 1.0, 0.0, 1.0, 1.0).finished(); }

inline eiso::Matrix nearly_singular2() {
    return (eiso::Matrix(2, 2) << 1.0, 1e-16, 0.0, 1e-16).finished();
}

inline eiso::Vector fly_x0() {
    return (eiso::Vector(5) << 1.2, 1.0, 0.6, 0.0, 2.0).finished();
}

}  // namespace fixtures
