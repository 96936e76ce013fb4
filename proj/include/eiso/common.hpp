#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eiso {

/// Raised when a model evaluation produces a non-finite value or is queried
/// at a degenerate point (e.g. zero airspeed in the fly model). Signals a
/// modeling error; the surrounding analysis window must be aborted rather
/// than silently filled with NaN.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when the sparse solver exhausts its iteration budget without
/// converging. Distinct from certified infeasibility, which is a result.
class SolverError : public std::runtime_error {
  public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Wraps an angle (or angle difference) into (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

/// Thread count for the parallel kernels: 0 picks the OpenMP default,
/// 1 forces single-threaded execution, k>1 requests k threads.
/// Returns the count that will actually be used.
int resolve_threads(int requested);

/// Locale-independent shortest-round-trip float formatting at 12 significant
/// digits; infinities print as "inf"/"-inf". Used by every report writer so
/// identical runs produce byte-identical files.
std::string format_float(double value);

}  // namespace eiso
