#ifndef MODDEV_REPRESENTATION_HPP
#define MODDEV_REPRESENTATION_HPP

#include <cstdint>

#include "moddev/convex.hpp"
#include "moddev/dominating.hpp"
#include "moddev/tilting.hpp"

namespace moddev {

enum class ReprMode { ExactEnumeration, MonteCarlo };

/// The representation-formula split P(S_n/b_n in D) = prefactor * j_n,
/// with the full prefactor
/// exp{-(b_n^2/n) lambda - (b_n^2/n)[sigma_g^2/2 - (n^2/b_n^2) log m((b_n/n) v)]}
/// and j_n the tilted expectation of exp{-(b_n^2/n) g(S_n/b_n - a0)} on the
/// event. With exact enumeration the identity is non-asymptotic: it holds
/// for every n and b_n.
struct ReprDecomposition {
    double prob = 0.0;       // brute-force (exact) or estimated probability
    double prefactor = 0.0;
    double j_n = 0.0;
    double gap = 0.0;        // |prob - prefactor * j_n|
    ReprMode mode = ReprMode::ExactEnumeration;
    double prob_se = 0.0;    // MC mode only
    double j_n_se = 0.0;     // MC mode only
};

/// Exact P(S_n in b_n D) for finite-support bases by enumerating all
/// (#atoms)^n outcome tuples (strict membership). Requires
/// (#atoms)^n <= 10^7.
double brute_force_probability(const BaseDistribution& base, long n, double b_n,
                               const ConvexBody& body);

/// Exact two-sided evaluation: brute-force probability against the
/// prefactor and the enumerated tilted expectation j_n.
ReprDecomposition repr_exact(const BaseDistribution& base, long n, double b_n,
                             const ConvexBody& body, const DominatingPoint& dp);

/// Monte Carlo counterpart for bases or n beyond the enumeration cap: the
/// probability side comes from the tilted importance-sampling estimator,
/// the j_n side from an independent stream, so the identity check carries
/// a genuine confidence interval.
ReprDecomposition repr_estimate(const BaseDistribution& base, long n, double b_n,
                                const ConvexBody& body, const DominatingPoint& dp,
                                long samples, std::uint64_t seed, int threads);

/// Full Lemma-style prefactor including the log-MGF correction term.
double repr_prefactor_full(const BaseDistribution& base, const DominatingPoint& dp,
                           double n, double b_n);

/// Simplified asymptotic prefactor exp{-(b_n^2/n) lambda}.
double theorem1_prefactor(const DominatingPoint& dp, double n, double b_n);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    long samples = 0;
};

/// Monte Carlo estimate of E[exp{-g(T_n - E T_n)} 1{T_n in (b_n^2/n) D}]
/// with T_n = (b_n/n) sum of n tilted increments and E T_n computed
/// exactly from the tilted mean.
MeanSe jn_estimate(const TiltedSampler& sampler, const DominatingPoint& dp, long n,
                   double b_n, const ConvexBody& body, long samples,
                   std::uint64_t seed, int threads);

/// Analytic route for Gaussian increments against a half-space:
/// P(S_n in b_n D) = normal_upper_tail(b_n sigma_g / sqrt(n)), and the
/// decomposition parts in closed form.
ReprDecomposition repr_gaussian_halfspace(const GaussianModel& model,
                                          const HalfSpace& hs,
                                          const DominatingPoint& dp, double n,
                                          double b_n);

}  // namespace moddev

#endif
