#ifndef MODDEV_ASYMPTOTICS_HPP
#define MODDEV_ASYMPTOTICS_HPP

#include <cstdint>
#include <vector>

#include "moddev/convex.hpp"
#include "moddev/dominating.hpp"
#include "moddev/montecarlo.hpp"

namespace moddev {

/// Standard normal upper tail P(Z > z).
double normal_upper_tail(double z);

enum class GaussEstimator { Auto, Naive, Tilted };

/// P(G in rho D) for L(G) = gamma. Half-spaces evaluate in closed form
/// (a one-dimensional normal tail); balls and polytopes run Monte Carlo,
/// either naive or importance-sampled with the exact Gaussian tilt at the
/// dominating point.
EstimateReport gaussian_set_probability(const GaussianModel& model,
                                        const ConvexBody& body, double rho,
                                        long samples, std::uint64_t seed,
                                        int threads,
                                        GaussEstimator method = GaussEstimator::Auto);

/// Both sides of the Cameron-Martin identity
/// P(G in rho D) = exp(-rho^2 lambda) E[e^{-rho g(G)} 1{G in rho (D - a0)}],
/// each estimated with its own seed so the comparison is a genuine
/// two-route check.
struct CameronMartinCheck {
    EstimateReport lhs;      // direct estimate of P(G in rho D)
    EstimateReport rhs;      // prefactor times tilted-form expectation
    double diff = 0.0;       // lhs.p_hat - rhs.p_hat
    double combined_se = 0.0;
};

CameronMartinCheck cameron_martin_check(const GaussianModel& model, const Ball& ball,
                                        double rho, long samples,
                                        std::uint64_t seed, int threads);

/// E exp(-Q / (2c)) for Q = sum_j eigs[j] Z_j^2, i.e. the closed form
/// prod_j (1 + eigs[j]/c)^{-1/2} of the integral
/// int_0^inf e^{-s} P(Q <= 2 s c) ds.
double weighted_chisq_laplace(const std::vector<double>& eigs, double c);

/// The same integral evaluated literally: Gauss-Laguerre nodes in s with
/// the weighted chi-square CDF estimated by Monte Carlo. Validation path
/// for the closed form; needs quad_nodes >= 16.
double quadrature_integral(const std::vector<double>& eigs, double c,
                           long mc_samples, int quad_nodes, std::uint64_t seed);

/// Conservative standard-error bound for quadrature_integral (the CDF
/// estimates share one sample of Q, so node errors are combined by their
/// worst-case correlation).
double quadrature_integral_se(const std::vector<double>& eigs, double c,
                              long mc_samples, int quad_nodes,
                              std::uint64_t seed);

/// Assembled ball-formula data: the dominating point, the geometry factor
/// b with 1/b = g(a - a0), the spectrum of cov(G2) = Sigma - a0 a0^T/sigma_g^2
/// on the hyperplane {g = 0}, the integral factor, and the value
/// (2 pi sigma_g^2 b_n^2/n)^{-1/2} exp{-(b_n^2/n) lambda} * integral.
struct BallAsymptotic {
    DominatingPoint dp;
    double b_geom = 0.0;
    std::vector<double> g2_eigs;
    double integral = 0.0;
    double rho2 = 0.0;  // b_n^2 / n
    double value = 0.0;
};

BallAsymptotic theorem5_value(const GaussianModel& model, const Ball& ball,
                              double n, const GrowthSchedule& schedule);

BallAsymptotic theorem5_value(const SpectralModel& spectral, const Ball& ball,
                              double n, const GrowthSchedule& schedule);

/// The upper-envelope constant (2 pi sigma_g^2)^{-1/2} (sqrt(n)/b_n)
/// exp{-(b_n^2/n) lambda}.
double theorem1_upper(const DominatingPoint& dp, double n,
                      const GrowthSchedule& schedule);

}  // namespace moddev

#endif
