#include <doctest.h>

#include <cmath>

#include "moddev/asymptotics.hpp"
#include "moddev/errors.hpp"
#include "moddev/quadrature.hpp"

using namespace moddev;

namespace {

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

}  // namespace

TEST_CASE("gauss-laguerre rule integrates polynomials and exponentials") {
    const QuadratureRule rule = gauss_laguerre(32);
    double mass = 0.0, mean = 0.0, cube = 0.0, expo = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        mass += rule.weights[i];
        mean += rule.weights[i] * rule.nodes[i];
        cube += rule.weights[i] * std::pow(rule.nodes[i], 3);
        expo += rule.weights[i] * std::exp(-rule.nodes[i]);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));      // int e^-s ds
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));      // int s e^-s ds
    CHECK(cube == doctest::Approx(6.0).epsilon(1e-11));      // 3!
    CHECK(expo == doctest::Approx(0.5).epsilon(1e-10));      // int e^-2s ds
}

TEST_CASE("normal upper tail spot values") {
    CHECK(normal_upper_tail(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_upper_tail(2.0) == doctest::Approx(0.0227501).epsilon(1e-5));
    CHECK(normal_upper_tail(3.719) == doctest::Approx(1e-4).epsilon(2e-2));
}

TEST_CASE("weighted chi-square laplace closed form") {
    CHECK(weighted_chisq_laplace({1.0}, 1.0) ==
          doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-12));
    CHECK(weighted_chisq_laplace({1.0}, 1.0) ==
          doctest::Approx(0.7071068).epsilon(1e-6));
    CHECK(weighted_chisq_laplace({}, 3.0) == 1.0);
    CHECK(weighted_chisq_laplace({1.0, 1.0}, 2.0) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(weighted_chisq_laplace({1.0, 1.0}, 2.0) ==
          doctest::Approx(0.6666667).epsilon(1e-6));
    CHECK_THROWS_AS(weighted_chisq_laplace({-0.1}, 1.0), Error);
    CHECK_THROWS_AS(weighted_chisq_laplace({1.0}, 0.0), Error);
}

TEST_CASE("quadrature path validates the product formula") {
    std::vector<std::vector<double>> eig_sets = {{1.0}, {1.0, 1.0}};
    {
        std::vector<double> tail;
        for (int j = 2; j <= 20; ++j) tail.push_back(1.0 / (j * j));
        eig_sets.push_back(tail);
    }
    int fixture = 0;
    for (const auto& eigs : eig_sets) {
        for (double c : {0.5, 1.0, 2.0}) {
            const std::uint64_t seed = 9000 + fixture++;
            const double closed = weighted_chisq_laplace(eigs, c);
            const double quad = quadrature_integral(eigs, c, 200000, 96, seed);
            const double se = quadrature_integral_se(eigs, c, 200000, 96, seed);
            CHECK(std::abs(closed - quad) <=
                  std::max(1e-3 * closed, 4.0 * se));
        }
    }
    // c -> infinity: CDF saturates at 1 on every node
    CHECK(quadrature_integral({1.0, 0.5}, 1e9, 5000, 24, 3) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(quadrature_integral({1.0}, 1.0, 1000, 8, 3), Error);
}

TEST_CASE("gaussian_set_probability half-space closed form") {
    const GaussianModel id2 = build_gaussian(Matrix::Identity(2, 2));
    const ConvexBody hs = HalfSpace{vec2(1, 0), 1.0};
    const EstimateReport rep = gaussian_set_probability(id2, hs, 2.0, 0, 1, 1);
    CHECK(rep.method == Method::ClosedForm);
    CHECK(rep.p_hat == doctest::Approx(0.0227501).epsilon(1e-5));
    CHECK(rep.std_err == 0.0);

    // shrinking rho raises the probability monotonically; the zero-scaled
    // set is empty by convention
    double prev = 0.0;
    for (double rho : {2.0, 1.0, 0.5, 0.25}) {
        const double p = gaussian_set_probability(id2, hs, rho, 0, 1, 1).p_hat;
        CHECK(p > prev);
        prev = p;
    }
    CHECK(gaussian_set_probability(id2, hs, 0.0, 0, 1, 1).p_hat == 0.0);
}

TEST_CASE("gaussian_set_probability naive and tilted agree") {
    const GaussianModel id2 = build_gaussian(Matrix::Identity(2, 2));
    const ConvexBody ball = Ball{vec2(2, 0), 1.0};
    const EstimateReport naive =
        gaussian_set_probability(id2, ball, 1.0, 400000, 11, 2, GaussEstimator::Naive);
    const EstimateReport tilted =
        gaussian_set_probability(id2, ball, 1.0, 400000, 12, 2, GaussEstimator::Tilted);
    const double joint =
        std::sqrt(naive.std_err * naive.std_err + tilted.std_err * tilted.std_err);
    CHECK(std::abs(naive.p_hat - tilted.p_hat) <= 4.0 * joint);
    CHECK(*tilted.ess <= tilted.samples);
    CHECK(tilted.std_err < naive.std_err);  // variance reduction at rho = 1
}

TEST_CASE("cameron-martin identity within monte carlo noise") {
    const GaussianModel id2 = build_gaussian(Matrix::Identity(2, 2));
    const Ball ball{vec2(2, 0), 1.0};
    for (double rho : {1.0, 2.0}) {
        const CameronMartinCheck cm =
            cameron_martin_check(id2, ball, rho, 400000, 2025, 2);
        CHECK(std::abs(cm.diff) <= 4.0 * cm.combined_se);
        CHECK(cm.lhs.p_hat > 0.0);
        CHECK(cm.rhs.p_hat > 0.0);
    }
}

TEST_CASE("theorem5 assembly for the unit ball fixture") {
    const GaussianModel id2 = build_gaussian(Matrix::Identity(2, 2));
    const Ball ball{vec2(2, 0), 1.0};
    const GrowthSchedule sched = GrowthSchedule::make(1.0, 0.6);
    const BallAsymptotic ba = theorem5_value(id2, ball, 1e4, sched);

    CHECK(ba.b_geom == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(ba.g2_eigs.size() == 1);
    CHECK(ba.g2_eigs[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ba.integral == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(ba.rho2 == doctest::Approx(6.30957).epsilon(1e-5));
    // 0.158834 * 0.042647 * 0.70711
    CHECK(ba.value == doctest::Approx(0.004790).epsilon(1e-3));

    // schedule outside theorem mode is rejected
    CHECK_THROWS_AS(theorem5_value(id2, ball, 1e4, GrowthSchedule::make(1.0, 0.7)),
                    Error);
    // ball touching the origin is rejected
    CHECK_THROWS_AS(theorem5_value(id2, Ball{vec2(2, 0), 2.0}, 1e4, sched), Error);
}

TEST_CASE("theorem5 on the truncated spectral model") {
    const SpectralModel spec = make_power_spectrum(2.0, 20);
    Vector center = Vector::Zero(20);
    center[0] = 2.0;
    const Ball ball{center, 1.0};
    const GrowthSchedule sched = GrowthSchedule::make(1.0, 0.6);
    const BallAsymptotic ba = theorem5_value(spec, ball, 1e4, sched);

    REQUIRE(ba.g2_eigs.size() == 19);
    double want = 1.0;
    for (int j = 2; j <= 20; ++j) want *= std::pow(1.0 + 1.0 / (j * j), -0.5);
    CHECK(ba.integral == doctest::Approx(want).epsilon(1e-10));
    CHECK(ba.dp.lambda_star == doctest::Approx(0.5).epsilon(1e-8));

    // cross-check the integral against the literal quadrature path
    const double quad = quadrature_integral(ba.g2_eigs,
                                            ba.b_geom * ball.radius * ball.radius,
                                            200000, 96, 5150);
    const double se = quadrature_integral_se(ba.g2_eigs,
                                             ba.b_geom * ball.radius * ball.radius,
                                             200000, 96, 5150);
    CHECK(std::abs(ba.integral - quad) <= std::max(1e-3 * ba.integral, 4.0 * se));
}

TEST_CASE("theorem1 upper bound and the ratio to theorem5") {
    const GaussianModel id2 = build_gaussian(Matrix::Identity(2, 2));
    const Ball ball{vec2(2, 0), 1.0};
    const GrowthSchedule sched = GrowthSchedule::make(1.0, 0.6);
    const DominatingPoint dp = solve_ball(id2, ball);

    const double up = theorem1_upper(dp, 1e4, sched);
    CHECK(up == doctest::Approx(0.006774).epsilon(2e-4));

    const BallAsymptotic ba = theorem5_value(id2, ball, 1e4, sched);
    CHECK(ba.value / up == doctest::Approx(ba.integral).epsilon(1e-10));
    CHECK(ba.value <= up * (1.0 + 1e-12));

    // doubling sigma_g^2 shrinks the constant by sqrt(2)
    DominatingPoint wide = dp;
    wide.sigma_g2 = 2.0 * dp.sigma_g2;
    CHECK(theorem1_upper(wide, 1e4, sched) * std::sqrt(2.0) ==
          doctest::Approx(up).epsilon(1e-12));
}
