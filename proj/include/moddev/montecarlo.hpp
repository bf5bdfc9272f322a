#ifndef MODDEV_MONTECARLO_HPP
#define MODDEV_MONTECARLO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moddev/convex.hpp"
#include "moddev/tilting.hpp"

namespace moddev {

enum class Method { Naive, Tilted, ClosedForm };

std::string method_name(Method m);

/// Probability estimate with its sampling diagnostics. `ess` and weight
/// fields are populated by the tilted estimator only; `vr_factor` only when
/// naive and tilted ran on the same fixture.
struct EstimateReport {
    double p_hat = 0.0;
    double std_err = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long samples = 0;
    Method method = Method::Naive;
    std::optional<double> ess;
    std::optional<double> vr_factor;
    bool ci_unreliable = false;
    double max_weight_hit = 0.0;
    std::uint64_t seed = 0;
    long n = 0;
    double b_n = 0.0;
};

/// Plain Monte Carlo for P(S_n in b_n D): mean of the indicator with
/// binomial standard error. Requires samples >= 1000.
EstimateReport estimate_naive(const BaseDistribution& base, long n,
                              const GrowthSchedule& schedule, const ConvexBody& body,
                              long samples, std::uint64_t seed, int threads);

/// Importance-sampled estimator under the exponential tilt
/// theta = (b_n/n) v, with weight exp{-<theta, S_n> + n log m(theta)} per
/// replication. Unbiased for P(S_n in b_n D); reports effective sample
/// size and the largest contributing weight.
EstimateReport estimate_tilted(const BaseDistribution& base, long n,
                               const GrowthSchedule& schedule, const ConvexBody& body,
                               const DominatingPoint& dp, long samples,
                               std::uint64_t seed, int threads);

/// Runs both estimators on the same fixture and fills vr_factor (naive
/// indicator variance over weighted-term variance at equal sample counts).
std::pair<EstimateReport, EstimateReport> estimate_both(
    const BaseDistribution& base, long n, const GrowthSchedule& schedule,
    const ConvexBody& body, const DominatingPoint& dp, long samples,
    std::uint64_t seed, int threads);

struct RatioRow {
    long n = 0;
    double b_n = 0.0;
    double rho = 0.0;
    double p_sum = 0.0;
    double se_sum = 0.0;
    double p_gauss = 0.0;
    double se_gauss = 0.0;
    double ratio = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::optional<double> theorem5;
};

/// Per-n comparison of the summed law against its Gaussian limit on the
/// same scaled set: p_sum by tilted importance sampling, p_gauss by the
/// Gaussian-measure path, ratio with a propagated 95% interval. Ball
/// bodies also get the ball-formula column. Requires a theorem-mode
/// schedule (alpha < 2/3).
std::vector<RatioRow> ratio_experiment(const BaseDistribution& base,
                                       const ConvexBody& body,
                                       const GrowthSchedule& schedule,
                                       const std::vector<long>& n_list,
                                       long samples, std::uint64_t seed,
                                       int threads);

struct McAccum;  // parallel.hpp

namespace detail {
/// Report assembly shared by the estimators: binomial errors for naive
/// runs, sample-variance errors plus ESS and weight diagnostics for
/// weighted runs.
EstimateReport make_report(const McAccum& acc, long samples, Method method,
                           std::uint64_t seed);
}  // namespace detail

}  // namespace moddev

#endif
