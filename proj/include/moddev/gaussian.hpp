#ifndef MODDEV_GAUSSIAN_HPP
#define MODDEV_GAUSSIAN_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "moddev/rng.hpp"

namespace moddev {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Centered Gaussian measure on R^d, stored with its Cholesky factor and
/// inverse. Immutable after construction and safe to share across threads.
struct GaussianModel {
    int dim = 0;
    Matrix covariance;    // Sigma, symmetric positive definite
    Matrix lower_factor;  // L with L L^T = Sigma
    Matrix inverse;       // Sigma^{-1}
};

/// Validate `covariance` and build the model.
///
/// Rejects matrices that are not symmetric to 1e-12 relative, or whose
/// smallest eigenvalue is <= 1e-12 * trace/d. Degenerate covariances are
/// rejected rather than regularized.
GaussianModel build_gaussian(const Matrix& covariance);

/// Rate function lambda_gamma(x) = x^T Sigma^{-1} x / 2.
double rate(const GaussianModel& model, const Vector& x);

/// One draw of G with law gamma: x = L z, z i.i.d. standard normal.
Vector sample(const GaussianModel& model, Rng& rng);

/// Symmetric positive definite square root, via eigendecomposition.
Matrix sqrt_spd(const Matrix& a);

/// Covariance spectrum for the truncated Hilbert-space case: a
/// nonincreasing positive sequence lambda_1 >= lambda_2 >= ... cut at
/// length dim. `nominal_tail` records the mass sum_{j>dim} lambda_j of the
/// generating rule (diagnostic only; the truncated model itself carries no
/// tail).
struct SpectralModel {
    std::vector<double> eigenvalues;
    double nominal_tail = 0.0;
    std::string rule;  // e.g. "j^-2"
};

/// Spectrum lambda_j = j^-p, j = 1..dim. Requires p > 1 so the full trace
/// is finite.
SpectralModel make_power_spectrum(double p, int dim);

/// Diagonal GaussianModel with the spectral eigenvalues on the diagonal.
GaussianModel to_gaussian(const SpectralModel& spec);

}  // namespace moddev

#endif
