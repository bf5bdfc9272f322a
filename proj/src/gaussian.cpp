#include "moddev/gaussian.hpp"

#include <cmath>

#include "moddev/errors.hpp"

namespace moddev {

GaussianModel build_gaussian(const Matrix& covariance) {
    if (covariance.rows() != covariance.cols() || covariance.rows() == 0)
        fail(Errc::InvalidConfig, "covariance must be a nonempty square matrix");
    if (!covariance.allFinite())
        fail(Errc::InvalidConfig, "covariance has non-finite entries");

    const int d = static_cast<int>(covariance.rows());
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        fail(Errc::NotSymmetric, "relative asymmetry " + std::to_string(asym / scale));

    // Work on the exactly symmetrized matrix from here on.
    Matrix sym = 0.5 * (covariance + covariance.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success)
        fail(Errc::NoConvergence, "eigendecomposition of covariance failed");
    const double floor = 1e-12 * sym.trace() / d;
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig <= floor)
        fail(Errc::NotPositiveDefinite,
             "smallest eigenvalue " + std::to_string(min_eig) +
                 " below floor " + std::to_string(floor));

    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() != Eigen::Success)
        fail(Errc::NotPositiveDefinite, "Cholesky factorization failed");

    GaussianModel model;
    model.dim = d;
    model.covariance = std::move(sym);
    model.lower_factor = llt.matrixL();
    model.inverse = llt.solve(Matrix::Identity(d, d));
    return model;
}

double rate(const GaussianModel& model, const Vector& x) {
    if (x.size() != model.dim)
        fail(Errc::DimensionMismatch, "rate: vector size vs model dim");
    return 0.5 * x.dot(model.inverse * x);
}

Vector sample(const GaussianModel& model, Rng& rng) {
    Vector z(model.dim);
    for (int i = 0; i < model.dim; ++i) z[i] = rng.normal();
    return model.lower_factor * z;
}

Matrix sqrt_spd(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        fail(Errc::InvalidConfig, "sqrt_spd: matrix must be square");
    Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success)
        fail(Errc::NoConvergence, "sqrt_spd: eigendecomposition failed");
    const double floor = 1e-12 * sym.trace() / static_cast<double>(a.rows());
    if (eig.eigenvalues().minCoeff() <= floor)
        fail(Errc::NotPositiveDefinite, "sqrt_spd: matrix not positive definite");
    const Vector roots = eig.eigenvalues().cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

SpectralModel make_power_spectrum(double p, int dim) {
    if (!(p > 1.0)) fail(Errc::InvalidConfig, "power spectrum needs p > 1");
    if (dim < 1) fail(Errc::InvalidConfig, "power spectrum needs dim >= 1");
    SpectralModel spec;
    spec.rule = "j^-" + std::to_string(p);
    spec.eigenvalues.resize(dim);
    for (int j = 1; j <= dim; ++j)
        spec.eigenvalues[j - 1] = std::pow(static_cast<double>(j), -p);
    // Tail mass sum_{j>dim} j^-p: partial sum plus integral remainder.
    double tail = 0.0;
    const long cutoff = 1000000;
    for (long j = dim + 1; j <= cutoff; ++j)
        tail += std::pow(static_cast<double>(j), -p);
    tail += std::pow(static_cast<double>(cutoff), 1.0 - p) / (p - 1.0);
    spec.nominal_tail = tail;
    return spec;
}

GaussianModel to_gaussian(const SpectralModel& spec) {
    const int d = static_cast<int>(spec.eigenvalues.size());
    if (d == 0) fail(Errc::InvalidConfig, "spectral model is empty");
    for (int j = 0; j < d; ++j) {
        if (!(spec.eigenvalues[j] > 0.0))
            fail(Errc::NotPositiveDefinite, "spectral eigenvalues must be positive");
        if (j > 0 && spec.eigenvalues[j] > spec.eigenvalues[j - 1])
            fail(Errc::InvalidConfig, "spectral eigenvalues must be nonincreasing");
    }
    Vector diag = Eigen::Map<const Vector>(spec.eigenvalues.data(), d);
    return build_gaussian(diag.asDiagonal());
}

}  // namespace moddev
