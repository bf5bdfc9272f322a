#include "moddev/montecarlo.hpp"

#include <cmath>

#include "moddev/asymptotics.hpp"
#include "moddev/errors.hpp"
#include "moddev/parallel.hpp"

namespace moddev {

std::string method_name(Method m) {
    switch (m) {
        case Method::Naive: return "naive";
        case Method::Tilted: return "tilted";
        case Method::ClosedForm: return "closed_form";
    }
    return "unknown";
}

namespace detail {

EstimateReport make_report(const McAccum& acc, long samples, Method method,
                           std::uint64_t seed) {
    EstimateReport rep;
    rep.samples = samples;
    rep.method = method;
    rep.seed = seed;
    rep.p_hat = acc.sum_y / static_cast<double>(samples);
    if (method == Method::Naive) {
        rep.std_err = std::sqrt(std::max(0.0, rep.p_hat * (1.0 - rep.p_hat)) /
                                static_cast<double>(samples));
        rep.ci_lo = std::max(0.0, rep.p_hat - 1.96 * rep.std_err);
        rep.ci_hi = std::min(1.0, rep.p_hat + 1.96 * rep.std_err);
        rep.ci_unreliable = rep.p_hat < 10.0 / static_cast<double>(samples);
        return rep;
    }
    if (samples > 1) {
        const double var =
            std::max(0.0, (acc.sum_y2 - samples * rep.p_hat * rep.p_hat) /
                              static_cast<double>(samples - 1));
        rep.std_err = std::sqrt(var / static_cast<double>(samples));
    }
    rep.ci_lo = std::max(0.0, rep.p_hat - 1.96 * rep.std_err);
    rep.ci_hi = rep.p_hat + 1.96 * rep.std_err;
    rep.ess = acc.sum_y2 > 0.0 ? acc.sum_y * acc.sum_y / acc.sum_y2 : 0.0;
    rep.max_weight_hit = acc.max_w_hit;
    return rep;
}

}  // namespace detail

namespace {

void check_fixture(const BaseDistribution& base, const ConvexBody& body, long n) {
    check_base(base);
    check_structure(body);
    if (base_dim(base) != body_dim(body))
        fail(Errc::DimensionMismatch, "base dimension vs body dimension");
    if (n < 1) fail(Errc::InvalidConfig, "n must be >= 1");
}

void check_dp_matches(const BaseDistribution& base, const DominatingPoint& dp) {
    const Matrix cov = covariance(base);
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (dp.covariance.rows() != cov.rows() ||
        (dp.covariance - cov).cwiseAbs().maxCoeff() > 1e-9 * scale)
        fail(Errc::CovarianceMismatch,
             "dominating point was solved against a different covariance");
}

}  // namespace

EstimateReport estimate_naive(const BaseDistribution& base, long n,
                              const GrowthSchedule& schedule, const ConvexBody& body,
                              long samples, std::uint64_t seed, int threads) {
    check_fixture(base, body, n);
    if (samples < 1000)
        fail(Errc::InvalidConfig, "naive estimator needs at least 1000 samples");

    const double b_n = schedule.b(static_cast<double>(n));
    const ConvexBody event_set = scale(body, b_n);
    const TiltedSampler sampler =
        make_tilt_direct(base, Vector::Zero(base_dim(base)));

    McAccum acc = run_replications(
        samples, seed, threads, [&](Rng& rng, long) -> RepOutcome {
            const bool hit = contains(event_set, sampler.sample_sum(n, rng));
            return {hit ? 1.0 : 0.0, 1.0, hit};
        });

    EstimateReport rep = detail::make_report(acc, samples, Method::Naive, seed);
    rep.n = n;
    rep.b_n = b_n;
    return rep;
}

EstimateReport estimate_tilted(const BaseDistribution& base, long n,
                               const GrowthSchedule& schedule, const ConvexBody& body,
                               const DominatingPoint& dp, long samples,
                               std::uint64_t seed, int threads) {
    check_fixture(base, body, n);
    if (samples < 1) fail(Errc::InvalidConfig, "samples must be >= 1");
    check_dp_matches(base, dp);

    const double b_n = schedule.b(static_cast<double>(n));
    const ConvexBody event_set = scale(body, b_n);
    const TiltedSampler sampler = make_tilt(base, dp, n, schedule);
    const Vector& theta = sampler.theta();
    const double n_log_m = static_cast<double>(n) * sampler.log_normalizer();

    McAccum acc = run_replications(
        samples, seed, threads, [&](Rng& rng, long) -> RepOutcome {
            const Vector s = sampler.sample_sum(n, rng);
            const double w = std::exp(n_log_m - theta.dot(s));
            const bool hit = contains(event_set, s);
            return {hit ? w : 0.0, w, hit};
        });

    EstimateReport rep = detail::make_report(acc, samples, Method::Tilted, seed);
    rep.n = n;
    rep.b_n = b_n;
    // Contributing weights obey w <= exp(n log m(theta)): on D the tilt
    // exponent <theta, S_n> = (b_n^2/n) g(S_n/b_n) >= (b_n^2/n) g(a0) > 0.
    if (rep.max_weight_hit > std::exp(n_log_m) * (1.0 + 1e-12))
        fail(Errc::SupportViolation,
             "importance weight above exp(n log m) on a hit; dominating point "
             "does not support the event set");
    return rep;
}

std::pair<EstimateReport, EstimateReport> estimate_both(
    const BaseDistribution& base, long n, const GrowthSchedule& schedule,
    const ConvexBody& body, const DominatingPoint& dp, long samples,
    std::uint64_t seed, int threads) {
    EstimateReport naive =
        estimate_naive(base, n, schedule, body, samples, mix64(seed, 0x6e61), threads);
    EstimateReport tilted = estimate_tilted(base, n, schedule, body, dp, samples,
                                            mix64(seed, 0x7469), threads);
    const double var_naive = naive.p_hat * (1.0 - naive.p_hat);
    const double var_tilted = tilted.std_err * tilted.std_err *
                              static_cast<double>(tilted.samples);
    if (var_tilted > 0.0) {
        naive.vr_factor = var_naive / var_tilted;
        tilted.vr_factor = naive.vr_factor;
    }
    return {naive, tilted};
}

std::vector<RatioRow> ratio_experiment(const BaseDistribution& base,
                                       const ConvexBody& body,
                                       const GrowthSchedule& schedule,
                                       const std::vector<long>& n_list,
                                       long samples, std::uint64_t seed,
                                       int threads) {
    if (!schedule.theorem_mode())
        fail(Errc::InvalidConfig,
             "ratio experiment requires a theorem-mode schedule (alpha < 2/3)");
    if (n_list.empty()) fail(Errc::InvalidConfig, "empty n list");

    // Weak-limit matching: the Gaussian comparison law has the covariance
    // of the increments. Degenerate discrete covariances are rejected here.
    const GaussianModel model = build_gaussian(covariance(base));
    const DominatingPoint dp = solve_dominating(model, body);
    const bool is_ball = std::holds_alternative<Ball>(body);

    std::vector<RatioRow> rows;
    rows.reserve(n_list.size());
    for (size_t k = 0; k < n_list.size(); ++k) {
        const long n = n_list[k];
        RatioRow row;
        row.n = n;
        row.b_n = schedule.b(static_cast<double>(n));
        row.rho = schedule.rho(static_cast<double>(n));

        const EstimateReport sum_rep = estimate_tilted(
            base, n, schedule, body, dp, samples, mix64(seed, 2 * k), threads);
        const EstimateReport gauss_rep = gaussian_set_probability(
            model, body, row.rho, samples, mix64(seed, 2 * k + 1), threads,
            std::holds_alternative<HalfSpace>(body) ? GaussEstimator::Auto
                                                    : GaussEstimator::Tilted);
        row.p_sum = sum_rep.p_hat;
        row.se_sum = sum_rep.std_err;
        row.p_gauss = gauss_rep.p_hat;
        row.se_gauss = gauss_rep.std_err;
        if (!(row.p_gauss > 0.0))
            fail(Errc::NoConvergence, "Gaussian probability estimate is zero");
        row.ratio = row.p_sum / row.p_gauss;
        const double rel_se =
            std::sqrt(std::pow(row.se_sum / row.p_sum, 2) +
                      std::pow(row.se_gauss / row.p_gauss, 2));
        row.ci_lo = row.ratio * (1.0 - 1.96 * rel_se);
        row.ci_hi = row.ratio * (1.0 + 1.96 * rel_se);
        if (is_ball)
            row.theorem5 = theorem5_value(model, std::get<Ball>(body),
                                          static_cast<double>(n), schedule)
                               .value;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace moddev
