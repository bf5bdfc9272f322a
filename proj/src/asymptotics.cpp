#include "moddev/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "moddev/errors.hpp"
#include "moddev/parallel.hpp"
#include "moddev/quadrature.hpp"

namespace moddev {

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

EstimateReport gaussian_set_probability(const GaussianModel& model,
                                        const ConvexBody& body, double rho,
                                        long samples, std::uint64_t seed,
                                        int threads, GaussEstimator method) {
    check_structure(body);
    if (body_dim(body) != model.dim)
        fail(Errc::DimensionMismatch, "body dimension vs model dimension");
    if (!(rho >= 0.0)) fail(Errc::InvalidConfig, "rho must be nonnegative");
    if (rho == 0.0) {
        // the zero-scaled set is empty by convention
        EstimateReport rep;
        rep.method = Method::ClosedForm;
        rep.seed = seed;
        return rep;
    }

    if (method == GaussEstimator::Auto &&
        std::holds_alternative<HalfSpace>(body)) {
        const auto& hs = std::get<HalfSpace>(body);
        const double sigma_w = std::sqrt(hs.normal.dot(model.covariance * hs.normal));
        EstimateReport rep;
        rep.method = Method::ClosedForm;
        rep.p_hat = normal_upper_tail(rho * hs.offset / sigma_w);
        rep.ci_lo = rep.ci_hi = rep.p_hat;
        rep.seed = seed;
        return rep;
    }

    const ConvexBody scaled = scale(body, rho);
    if (method == GaussEstimator::Tilted) {
        const DominatingPoint dp = solve_dominating(model, body);
        const Vector shift = rho * dp.a0;
        const double log_norm = 0.5 * rho * rho * dp.sigma_g2;
        McAccum acc = run_replications(
            samples, seed, threads, [&](Rng& rng, long) -> RepOutcome {
                const Vector g = shift + sample(model, rng);
                const double w = std::exp(log_norm - rho * dp.v.dot(g));
                const bool hit = contains(scaled, g);
                return {hit ? w : 0.0, w, hit};
            });
        return detail::make_report(acc, samples, Method::Tilted, seed);
    }

    McAccum acc = run_replications(
        samples, seed, threads, [&](Rng& rng, long) -> RepOutcome {
            const bool hit = contains(scaled, sample(model, rng));
            return {hit ? 1.0 : 0.0, 1.0, hit};
        });
    return detail::make_report(acc, samples, Method::Naive, seed);
}

CameronMartinCheck cameron_martin_check(const GaussianModel& model, const Ball& ball,
                                        double rho, long samples,
                                        std::uint64_t seed, int threads) {
    if (!(rho > 0.0)) fail(Errc::InvalidConfig, "rho must be positive");
    if (samples < 2) fail(Errc::InvalidConfig, "need at least 2 samples");
    const DominatingPoint dp = solve_ball(model, ball);

    CameronMartinCheck out;
    out.lhs = gaussian_set_probability(model, ConvexBody(ball), rho, samples,
                                       mix64(seed, 0x1), threads,
                                       GaussEstimator::Naive);

    // rhs: exp(-rho^2 lambda) E[e^{-rho g(G)} I(G in rho (D - a0))], sampled
    // with an independent stream.
    const Ball centered{ball.center - dp.a0, ball.radius};
    const ConvexBody shifted = scale(ConvexBody(centered), rho);
    const double prefactor = std::exp(-rho * rho * dp.lambda_star);
    McAccum acc = run_replications(
        samples, mix64(seed, 0x2), threads, [&](Rng& rng, long) -> RepOutcome {
            const Vector g = sample(model, rng);
            if (!contains(shifted, g)) return {0.0, 1.0, false};
            return {std::exp(-rho * dp.v.dot(g)), 1.0, true};
        });

    EstimateReport rhs;
    rhs.samples = samples;
    rhs.method = Method::Tilted;
    rhs.seed = mix64(seed, 0x2);
    const double mean = acc.sum_y / static_cast<double>(samples);
    const double var = std::max(
        0.0, (acc.sum_y2 - samples * mean * mean) / static_cast<double>(samples - 1));
    rhs.p_hat = prefactor * mean;
    rhs.std_err = prefactor * std::sqrt(var / static_cast<double>(samples));
    rhs.ci_lo = std::max(0.0, rhs.p_hat - 1.96 * rhs.std_err);
    rhs.ci_hi = rhs.p_hat + 1.96 * rhs.std_err;
    out.rhs = rhs;

    out.diff = out.lhs.p_hat - out.rhs.p_hat;
    out.combined_se = std::sqrt(out.lhs.std_err * out.lhs.std_err +
                                out.rhs.std_err * out.rhs.std_err);
    return out;
}

double weighted_chisq_laplace(const std::vector<double>& eigs, double c) {
    if (!(c > 0.0)) fail(Errc::InvalidConfig, "c must be positive");
    double log_acc = 0.0;
    for (double lam : eigs) {
        if (lam < 0.0)
            fail(Errc::InvalidConfig, "weighted chi-square eigenvalues must be >= 0");
        log_acc += std::log1p(lam / c);
    }
    return std::exp(-0.5 * log_acc);
}

namespace {

std::vector<double> chisq_sample_sorted(const std::vector<double>& eigs,
                                        long mc_samples, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> q(mc_samples);
    for (long i = 0; i < mc_samples; ++i) {
        double acc = 0.0;
        for (double lam : eigs) {
            const double z = rng.normal();
            acc += lam * z * z;
        }
        q[i] = acc;
    }
    std::sort(q.begin(), q.end());
    return q;
}

}  // namespace

double quadrature_integral(const std::vector<double>& eigs, double c,
                           long mc_samples, int quad_nodes, std::uint64_t seed) {
    if (quad_nodes < 16) fail(Errc::InvalidConfig, "need at least 16 quadrature nodes");
    if (mc_samples < 2) fail(Errc::InvalidConfig, "need at least 2 MC samples");
    if (!(c > 0.0)) fail(Errc::InvalidConfig, "c must be positive");
    const QuadratureRule rule = gauss_laguerre(quad_nodes);
    const std::vector<double> q = chisq_sample_sorted(eigs, mc_samples, seed);
    double acc = 0.0;
    for (int i = 0; i < quad_nodes; ++i) {
        const auto it = std::upper_bound(q.begin(), q.end(), 2.0 * rule.nodes[i] * c);
        const double cdf = static_cast<double>(it - q.begin()) /
                           static_cast<double>(mc_samples);
        acc += rule.weights[i] * cdf;
    }
    return acc;
}

double quadrature_integral_se(const std::vector<double>& eigs, double c,
                              long mc_samples, int quad_nodes,
                              std::uint64_t seed) {
    if (quad_nodes < 16) fail(Errc::InvalidConfig, "need at least 16 quadrature nodes");
    const QuadratureRule rule = gauss_laguerre(quad_nodes);
    const std::vector<double> q = chisq_sample_sorted(eigs, mc_samples, seed);
    // CDF estimates at all nodes come from one sample of Q; bound the
    // variance of the weighted sum by perfect positive correlation.
    double acc = 0.0;
    for (int i = 0; i < quad_nodes; ++i) {
        const auto it = std::upper_bound(q.begin(), q.end(), 2.0 * rule.nodes[i] * c);
        const double cdf = static_cast<double>(it - q.begin()) /
                           static_cast<double>(mc_samples);
        acc += rule.weights[i] *
               std::sqrt(cdf * (1.0 - cdf) / static_cast<double>(mc_samples));
    }
    return acc;
}

BallAsymptotic theorem5_value(const GaussianModel& model, const Ball& ball,
                              double n, const GrowthSchedule& schedule) {
    if (!(n >= 1.0)) fail(Errc::InvalidConfig, "n must be >= 1");
    if (!schedule.theorem_mode())
        fail(Errc::InvalidConfig,
             "ball formula requires a theorem-mode schedule (alpha < 2/3)");
    const ValidationReport val = validate_conditions(ConvexBody(ball), model);
    if (!val.passed())
        fail(Errc::InvalidSet, "ball violates the standing set conditions");

    BallAsymptotic out;
    out.dp = solve_ball(model, ball);

    const double g_x0 = out.dp.v.dot(ball.center - out.dp.a0);
    if (!(g_x0 > 0.0))
        fail(Errc::NoConvergence, "g(a - a0) must be positive");
    out.b_geom = 1.0 / g_x0;

    // cov(G2) = Sigma - a0 a0^T / sigma_g^2; its kernel is exactly the
    // direction of v, which is deflated to an exact zero.
    Matrix m = model.covariance -
               (out.dp.a0 * out.dp.a0.transpose()) / out.dp.sigma_g2;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
    if (eig.info() != Eigen::Success)
        fail(Errc::NoConvergence, "cov(G2) eigendecomposition failed");
    int v_idx = 0;
    double best = -1.0;
    for (int i = 0; i < model.dim; ++i) {
        const double overlap = std::abs(eig.eigenvectors().col(i).dot(out.dp.f_unit));
        if (overlap > best) {
            best = overlap;
            v_idx = i;
        }
    }
    for (int i = 0; i < model.dim; ++i) {
        if (i == v_idx) continue;
        double lam = eig.eigenvalues()[i];
        if (lam < -1e-10)
            fail(Errc::DegenerateG2,
                 "cov(G2) eigenvalue " + std::to_string(lam) + " below -1e-10");
        out.g2_eigs.push_back(std::max(0.0, lam));
    }
    std::sort(out.g2_eigs.rbegin(), out.g2_eigs.rend());

    out.integral = weighted_chisq_laplace(out.g2_eigs,
                                          out.b_geom * ball.radius * ball.radius);
    const double b_n = schedule.b(n);
    out.rho2 = b_n * b_n / n;
    out.value = std::pow(2.0 * M_PI * out.dp.sigma_g2 * out.rho2, -0.5) *
                std::exp(-out.rho2 * out.dp.lambda_star) * out.integral;
    return out;
}

BallAsymptotic theorem5_value(const SpectralModel& spectral, const Ball& ball,
                              double n, const GrowthSchedule& schedule) {
    return theorem5_value(to_gaussian(spectral), ball, n, schedule);
}

double theorem1_upper(const DominatingPoint& dp, double n,
                      const GrowthSchedule& schedule) {
    if (!(n >= 1.0)) fail(Errc::InvalidConfig, "n must be >= 1");
    if (!(dp.lambda_star > 0.0))
        fail(Errc::InvalidSet, "rate at the dominating point must be positive");
    const double b_n = schedule.b(n);
    return std::pow(2.0 * M_PI * dp.sigma_g2, -0.5) * (std::sqrt(n) / b_n) *
           std::exp(-(b_n * b_n / n) * dp.lambda_star);
}

}  // namespace moddev
