#pragma once

// Independent numerical oracles used by the test suites. Nothing here calls
// into the library's simulation, differencing or solver paths.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace oracles {

/// Dense matrix exponential by scaling-and-squaring with a Taylor series,
/// accurate to machine precision for the small matrices used in tests.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("expm: square matrix required");
    const double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
    int squarings = 0;
    if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const Eigen::MatrixXd As = A / std::pow(2.0, squarings);

    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd sum = term;
    for (int k = 1; k <= 40; ++k) {
        term = (As * term) / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18 * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

/// Stacked discrete-time observability matrix [C; CA; ...; CA^{w-1}].
inline Eigen::MatrixXd stacked_observability(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                             int w) {
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(C.rows());
    Eigen::MatrixXd stacked(w * p, n);
    Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k < w; ++k) {
        stacked.middleRows(k * p, p) = C * Ak;
        Ak = Ak * A;
    }
    return stacked;
}

/// Composite-Simpson quadrature of the continuous-time observability Gramian
///   W = int_0^T J(tau)^T J(tau) dtau,  J(tau) = C exp(A tau),
/// evaluated with `intervals` (even) subdivisions.
inline Eigen::MatrixXd gramian_by_simpson(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                          double T, int intervals) {
    if (intervals % 2 != 0) throw std::invalid_argument("gramian_by_simpson: even interval count required");
    const double h = T / intervals;
    const Eigen::MatrixXd Eh = expm(A * h);

    Eigen::MatrixXd Ek = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (int k = 0; k <= intervals; ++k) {
        const Eigen::MatrixXd J = C * Ek;
        double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        W += weight * (J.transpose() * J);
        Ek = Ek * Eh;
    }
    return W * (h / 3.0);
}

}  // namespace oracles
