#include <doctest.h>

#include <cmath>

#include "moddev/asymptotics.hpp"
#include "moddev/errors.hpp"
#include "moddev/representation.hpp"

using namespace moddev;

namespace {

Vector vec1(double x) {
    Vector v(1);
    v << x;
    return v;
}

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

BaseDistribution rademacher1() { return RademacherProduct{vec1(1.0)}; }

// Simpson-rule oracle for E[e^{-kappa W} 1{W > 0}], W ~ N(0, tau^2).
double lognormal_tail_quadrature(double kappa, double tau) {
    const double hi = 12.0 * tau + 20.0 * std::max(0.0, -kappa) * tau * tau;
    const long steps = 200000;  // even
    const double h = hi / steps;
    auto f = [&](double w) {
        return std::exp(-kappa * w) *
               std::exp(-w * w / (2.0 * tau * tau)) /
               (tau * std::sqrt(2.0 * M_PI));
    };
    double acc = f(0.0) + f(hi);
    for (long i = 1; i < steps; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("brute force enumeration oracle") {
    const ConvexBody half = HalfSpace{vec1(1.0), 0.5};
    CHECK(brute_force_probability(rademacher1(), 4, 3.0, half) ==
          doctest::Approx(5.0 / 16.0).epsilon(1e-15));
    CHECK(brute_force_probability(rademacher1(), 1, 1.0, half) ==
          doctest::Approx(0.5).epsilon(1e-15));

    // sums out of reach
    const ConvexBody far = HalfSpace{vec1(1.0), 10.0};
    CHECK(brute_force_probability(rademacher1(), 4, 1.0, far) == 0.0);

    CHECK_THROWS_AS(brute_force_probability(rademacher1(), 24, 3.0, half), Error);
    try {
        brute_force_probability(rademacher1(), 24, 3.0, half);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooLarge);
    }
}

TEST_CASE("brute force with discrete atoms") {
    // P(S_2 > 1.5) for atoms {-1, 2}, p = {2/3, 1/3}: sums 4 (1/9), 1, -2
    DiscreteBase db;
    db.atoms = {vec1(-1.0), vec1(2.0)};
    db.probs = {2.0 / 3.0, 1.0 / 3.0};
    const ConvexBody body = HalfSpace{vec1(1.0), 1.5};
    CHECK(brute_force_probability(db, 2, 1.0, body) ==
          doctest::Approx(1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("representation identity is exact for every n and b_n") {
    const GaussianModel m1 = build_gaussian(Matrix::Identity(1, 1));
    const ConvexBody half = HalfSpace{vec1(1.0), 0.5};
    const DominatingPoint dp = solve_halfspace(m1, std::get<HalfSpace>(half));
    CHECK(dp.a0[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(dp.lambda_star == doctest::Approx(0.125).epsilon(1e-14));

    for (long n : {1L, 2L, 4L, 6L, 8L}) {
        for (double b : {1.0, 3.0, 7.0}) {
            const ReprDecomposition d = repr_exact(rademacher1(), n, b, half, dp);
            if (d.prob == 0.0) {
                CHECK(d.j_n == 0.0);
                continue;
            }
            CHECK(d.gap <= 1e-12 * d.prob);
        }
    }

    // n=4, b=3: both sides are 5/16
    const ReprDecomposition d = repr_exact(rademacher1(), 4, 3.0, half, dp);
    CHECK(d.prob == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK(d.prefactor * d.j_n == doctest::Approx(0.3125).epsilon(1e-13));
}

TEST_CASE("representation identity on a d=2 polytope") {
    const GaussianModel id2 = build_gaussian(Matrix::Identity(2, 2));
    const Polytope poly{{HalfSpace{vec2(1, 0), 0.5}, HalfSpace{vec2(0, 1), 0.5}}};
    const DominatingPoint dp = solve_polytope(id2, poly);
    const BaseDistribution r2 = RademacherProduct{vec2(1.0, 1.0)};

    for (long n : {1L, 2L, 4L, 6L}) {
        for (double b : {1.0, 3.0}) {
            const ReprDecomposition d = repr_exact(r2, n, b, poly, dp);
            if (d.prob == 0.0) continue;
            CHECK(d.gap <= 1e-12 * d.prob);
        }
    }
}

TEST_CASE("covariance mismatch is rejected") {
    const GaussianModel wrong = build_gaussian(4.0 * Matrix::Identity(1, 1));
    const ConvexBody half = HalfSpace{vec1(1.0), 0.5};
    const DominatingPoint dp = solve_halfspace(wrong, std::get<HalfSpace>(half));
    CHECK_THROWS_AS(repr_exact(rademacher1(), 4, 3.0, half, dp), Error);
    try {
        repr_exact(rademacher1(), 4, 3.0, half, dp);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::CovarianceMismatch);
    }
}

TEST_CASE("gaussian half-space routes agree to 1e-10") {
    const GaussianModel m = build_gaussian(Matrix::Identity(1, 1) * 2.0);
    const HalfSpace hs{vec1(1.0), 1.2};
    const DominatingPoint dp = solve_halfspace(m, hs);
    for (double n : {16.0, 100.0, 1000.0}) {
        for (double b : {2.0, 8.0}) {
            const ReprDecomposition d = repr_gaussian_halfspace(m, hs, dp, n, b);
            // two-route: probability vs prefactor * j_n, both closed form
            CHECK(d.gap <= 1e-12 * d.prob);
            // j_n against independent quadrature of the lognormal tail
            const double kappa = b * b / n;
            const double tau = std::sqrt(n / (b * b) * dp.sigma_g2);
            const double jq = lognormal_tail_quadrature(kappa, tau);
            CHECK(d.j_n == doctest::Approx(jq).epsilon(1e-10));
            // full product against the normal tail oracle
            const double sigma_w = std::sqrt(2.0);
            const double oracle = normal_upper_tail(b * hs.offset / (std::sqrt(n) * sigma_w));
            CHECK(d.prefactor * d.j_n == doctest::Approx(oracle).epsilon(1e-10));
        }
    }
}

TEST_CASE("theorem1 prefactor") {
    const GaussianModel id2 = build_gaussian(Matrix::Identity(2, 2));
    const DominatingPoint dp = solve_halfspace(id2, HalfSpace{vec2(1, 0), 1.0});
    CHECK(dp.lambda_star == doctest::Approx(0.5).epsilon(1e-14));
    // b_n^2/n = 6.30957
    const double n = 1e4;
    const double b = std::pow(n, 0.6);
    CHECK(theorem1_prefactor(dp, n, b) == doctest::Approx(0.042647).epsilon(1e-4));
    CHECK(theorem1_prefactor(dp, 1.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-12));

    DominatingPoint degenerate = dp;
    degenerate.lambda_star = 0.0;
    CHECK_THROWS_AS(theorem1_prefactor(degenerate, 10.0, 5.0), Error);
}

TEST_CASE("jn_estimate lognormal mean on the whole space") {
    // body covering everything reachable: E e^{-g(T_n - E T_n)} =
    // exp(sigma_g^2 b^2 / (2n)) for Gaussian increments
    const GaussianModel id1 = build_gaussian(Matrix::Identity(1, 1));
    const DominatingPoint dp = solve_halfspace(id1, HalfSpace{vec1(1.0), 1.0});
    const BaseDistribution base = GaussianBase{id1};
    const long n = 100;
    const double b = 20.0;
    const TiltedSampler sampler =
        make_tilt_direct(base, vec1(b / static_cast<double>(n) * dp.v[0]));
    const ConvexBody everything = Ball{vec1(0.0), 1e9};
    const MeanSe est = jn_estimate(sampler, dp, n, b, everything, 400000, 4242, 2);
    const double want = std::exp(dp.sigma_g2 * b * b / (2.0 * n));
    CHECK(std::abs(est.mean - want) <= 4.0 * est.se);

    // disjoint body
    const ConvexBody nowhere = Ball{vec1(1e9), 1.0};
    const MeanSe zero = jn_estimate(sampler, dp, n, b, nowhere, 10000, 1, 2);
    CHECK(zero.mean == 0.0);
    CHECK(zero.se == 0.0);
}

TEST_CASE("jn_estimate matches enumeration for small Rademacher") {
    const GaussianModel m1 = build_gaussian(Matrix::Identity(1, 1));
    const ConvexBody half = HalfSpace{vec1(1.0), 0.5};
    const DominatingPoint dp = solve_halfspace(m1, std::get<HalfSpace>(half));
    const long n = 8;
    const double b = 3.0;

    const ReprDecomposition exact = repr_exact(rademacher1(), n, b, half, dp);
    // translate (2.11)-centered j_n to the (2.13) centering at E T_n
    const Vector theta = vec1(b / static_cast<double>(n) * dp.v[0]);
    const TiltedSampler sampler = make_tilt_direct(rademacher1(), theta);
    const double g_etn = b * dp.v[0] * sampler.mean()[0];
    const double g_ba0 = (b * b / static_cast<double>(n)) * dp.g(dp.a0);
    const double oracle = exact.j_n * std::exp(g_etn - g_ba0);

    const MeanSe est = jn_estimate(sampler, dp, n, b, half, 500000, 777, 2);
    CHECK(std::abs(est.mean - oracle) <= 4.0 * est.se);
}

TEST_CASE("repr_estimate: identity holds within joint confidence") {
    // Rademacher at n = 64 is far beyond the enumeration cap; the two
    // independently seeded MC routes must still satisfy the identity.
    const GaussianModel m1 = build_gaussian(Matrix::Identity(1, 1));
    const ConvexBody half = HalfSpace{vec1(1.0), 0.5};
    const DominatingPoint dp = solve_halfspace(m1, std::get<HalfSpace>(half));
    const ReprDecomposition d =
        repr_estimate(rademacher1(), 64, 16.0, half, dp, 400000, 515, 2);
    CHECK(d.mode == ReprMode::MonteCarlo);
    const double joint_se = std::sqrt(d.prob_se * d.prob_se +
                                      d.prefactor * d.prefactor * d.j_n_se * d.j_n_se);
    CHECK(d.gap <= 4.0 * joint_se);
    CHECK(d.prob > 0.0);

    // against the exact enumeration at a small n
    const ReprDecomposition exact = repr_exact(rademacher1(), 8, 3.0, half, dp);
    const ReprDecomposition mc =
        repr_estimate(rademacher1(), 8, 3.0, half, dp, 400000, 99, 2);
    CHECK(std::abs(mc.prob - exact.prob) <= 4.0 * mc.prob_se);
    CHECK(std::abs(mc.j_n - exact.j_n) <= 4.0 * mc.j_n_se);
}

TEST_CASE("prefactor correction decays like b^3/n^2") {
    // Asymmetric base: correction = (b^2/n)[sigma_g^2/2 - scaled log mgf]
    // has leading term (b^3/n^2) M3 g^3 / 6, i.e. slope 3 alpha - 2 in n
    // for b = n^alpha.
    DiscreteBase db;
    db.atoms = {vec1(-1.0), vec1(2.0)};
    db.probs = {2.0 / 3.0, 1.0 / 3.0};
    const BaseDistribution base = db;
    const double alpha = 0.6;
    const Vector g = vec1(0.5);
    const double sigma_g2 = 0.5 * 0.5 * 2.0;  // v^T Sigma v, Sigma = [2]

    std::vector<double> ns, errs;
    for (double n : {64.0, 256.0, 1024.0, 4096.0, 16384.0}) {
        const double b = std::pow(n, alpha);
        const double corr =
            (b * b / n) * std::abs(0.5 * sigma_g2 - scaled_log_mgf_at(base, g, n, b));
        ns.push_back(n);
        errs.push_back(corr);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < ns.size(); ++i) {
        const double x = std::log(ns[i]);
        const double y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope =
        (ns.size() * sxy - sx * sy) / (ns.size() * sxx - sx * sx);
    // expected 3 alpha - 2 = -0.2; one-sided: at least this fast
    CHECK(slope <= 3.0 * alpha - 2.0 + 0.05);
}

TEST_CASE("jn_estimate is bit-identical across thread counts") {
    const GaussianModel id1 = build_gaussian(Matrix::Identity(1, 1));
    const DominatingPoint dp = solve_halfspace(id1, HalfSpace{vec1(1.0), 1.0});
    const BaseDistribution base = GaussianBase{id1};
    const TiltedSampler sampler = make_tilt_direct(base, vec1(0.2));
    const ConvexBody half = HalfSpace{vec1(1.0), 1.0};
    const MeanSe a = jn_estimate(sampler, dp, 50, 10.0, half, 50000, 31, 1);
    const MeanSe b2 = jn_estimate(sampler, dp, 50, 10.0, half, 50000, 31, 2);
    const MeanSe c = jn_estimate(sampler, dp, 50, 10.0, half, 50000, 31, 7);
    CHECK(a.mean == b2.mean);
    CHECK(a.se == b2.se);
    CHECK(a.mean == c.mean);
}
