#include "moddev/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "moddev/errors.hpp"

namespace moddev {

QuadratureRule gauss_laguerre(int n) {
    if (n < 1) fail(Errc::InvalidConfig, "quadrature order must be >= 1");

    // Jacobi matrix of the (alpha = 0) Laguerre recurrence: diagonal 2k+1,
    // off-diagonal k. Nodes are its eigenvalues, weights the squared first
    // eigenvector components (total mass int e^{-s} ds = 1).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        jacobi(k, k) = 2.0 * k + 1.0;
        if (k + 1 < n) {
            jacobi(k, k + 1) = k + 1.0;
            jacobi(k + 1, k) = k + 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success)
        fail(Errc::NoConvergence, "Laguerre Jacobi eigendecomposition failed");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = eig.eigenvalues()[i];
        const double first = eig.eigenvectors()(0, i);
        rule.weights[i] = first * first;
    }
    return rule;
}

}  // namespace moddev
