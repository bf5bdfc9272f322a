#ifndef MODDEV_DOMINATING_HPP
#define MODDEV_DOMINATING_HPP

#include <cstdint>

#include "moddev/convex.hpp"
#include "moddev/gaussian.hpp"

namespace moddev {

/// The unique rate-minimizing point a0 of the closure of D, together with
/// the supporting functional g(x) = <v, x>. By construction v = Sigma^{-1} a0,
/// so Sigma v = a0, sigma_g^2 = <v, a0> = 2 lambda_star and g(a0) = sigma_g^2
/// hold as exact identities. `covariance` keeps the Sigma the point was
/// solved against so downstream consumers can detect mismatched models.
struct DominatingPoint {
    Vector a0;
    double lambda_star = 0.0;
    Vector v;
    double sigma_g2 = 0.0;
    Vector f_unit;  // v / ||v||
    double t0 = 0.0;  // ||v||, so g = t0 * f
    double kkt_residual = 0.0;
    Matrix covariance;

    double g(const Vector& x) const { return v.dot(x); }
};

/// Closed form for half-spaces: a0 = c * Sigma w / (w^T Sigma w).
DominatingPoint solve_halfspace(const GaussianModel& model, const HalfSpace& hs);

/// Balls: the multiplier equation x(mu) = mu (Sigma^{-1} + mu I)^{-1} a is
/// solved by bisection on ||x(mu) - a|| = R.
DominatingPoint solve_ball(const GaussianModel& model, const Ball& ball);

/// Polytopes: minimum of the quadratic rate over the closed polyhedron via
/// Dykstra's alternating projections in the whitened metric, with an
/// active-set KKT certificate (residual stored on the result).
DominatingPoint solve_polytope(const GaussianModel& model, const Polytope& poly,
                               long max_cycles = 100000);

/// Dispatch on the body variant.
DominatingPoint solve_dominating(const GaussianModel& model, const ConvexBody& body);

namespace detail {
/// Minimizer of the rate over the closed polyhedron, with no
/// origin-exclusion check (validators need the raw min-norm point).
Vector polytope_min_rate_point(const GaussianModel& model, const Polytope& poly,
                               long max_cycles = 100000);
}  // namespace detail

struct SupportReport {
    double min_margin = 0.0;  // min over samples of g(x) - g(a0)
    long samples = 0;
};

/// Samples points of D near and away from a0 and verifies the supporting
/// hyperplane property g(x) >= g(a0) - 1e-9. Throws SupportViolation with
/// a witness on failure.
SupportReport verify_support(const GaussianModel& model, const ConvexBody& body,
                             const DominatingPoint& dp, long samples,
                             std::uint64_t seed);

}  // namespace moddev

#endif
