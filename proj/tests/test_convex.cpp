#include <doctest.h>

#include <cmath>
#include <limits>

#include "moddev/convex.hpp"
#include "moddev/dominating.hpp"
#include "moddev/errors.hpp"

using namespace moddev;

namespace {

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

Ball ball2(double cx, double cy, double r) { return Ball{vec2(cx, cy), r}; }

HalfSpace hs2(double nx, double ny, double c) { return HalfSpace{vec2(nx, ny), c}; }

// Independent closed forms for the slice width (circle chord geometry and
// half-space trigonometry), used as oracles against the bisection path.
double ball_width_oracle(const Ball& ball, const Vector& a0, const Vector& v,
                         const Vector& x0, double s) {
    const Vector vhat = v / v.norm();
    const Vector u = s * x0 - (ball.center - a0);
    const double uperp = vhat.dot(u);
    const Vector upar = u - uperp * vhat;
    const double inside = ball.radius * ball.radius - uperp * uperp;
    if (inside <= 0.0) return 0.0;
    return std::max(0.0, std::sqrt(inside) - upar.norm());
}

double hs_width_oracle(const HalfSpace& hs, const Vector& a0, const Vector& v,
                       const Vector& x0, double s) {
    const Vector vhat = v / v.norm();
    const Vector wpar = hs.normal - vhat.dot(hs.normal) * vhat;
    const double c_local = hs.offset - hs.normal.dot(a0);
    const double along = s * hs.normal.dot(x0);
    if (wpar.norm() <= 1e-14 * hs.normal.norm())
        return along >= c_local ? std::numeric_limits<double>::infinity() : 0.0;
    return std::max(0.0, (along - c_local) / wpar.norm());
}

}  // namespace

TEST_CASE("membership open vs closed") {
    const ConvexBody b = ball2(2, 0, 1);
    CHECK(contains(b, vec2(2, 0)));
    CHECK_FALSE(contains(b, vec2(1, 0)));  // boundary excluded
    CHECK(contains_closure(b, vec2(1, 0)));
    CHECK(contains_closure(b, vec2(2, 0)));
    CHECK_FALSE(contains_closure(b, vec2(0.5, 0)));

    const ConvexBody h = hs2(1, 0, 1);
    CHECK(contains(h, vec2(1.5, 7)));
    CHECK_FALSE(contains(h, vec2(1, 7)));
    CHECK(contains_closure(h, vec2(1, 7)));

    Polytope poly{{hs2(1, 0, 0.5), hs2(0, 1, 0.5)}};
    CHECK(contains(ConvexBody(poly), vec2(1, 1)));
    CHECK_FALSE(contains(ConvexBody(poly), vec2(0.5, 1)));
    CHECK(contains_closure(ConvexBody(poly), vec2(0.5, 1)));

    CHECK_THROWS_AS(contains(b, Vector::Zero(3)), Error);
}

TEST_CASE("contains implies closure, and closure commutes with scaling") {
    Rng rng(3);
    const ConvexBody bodies[] = {ConvexBody(ball2(2, 0, 1.5)), ConvexBody(hs2(1, 1, 1)),
                                 ConvexBody(Polytope{{hs2(1, 0, 0.3), hs2(0.3, 1, 0.1)}})};
    for (const auto& body : bodies) {
        for (int i = 0; i < 2000; ++i) {
            Vector x = vec2(4.0 * rng.normal(), 4.0 * rng.normal());
            if (contains(body, x)) CHECK(contains_closure(body, x));
            const double t = 0.25 + 3.0 * rng.uniform();
            CHECK(contains_closure(scale(body, t), t * x) ==
                  contains_closure(body, x));
        }
    }
}

TEST_CASE("convexity of membership") {
    Rng rng(17);
    const ConvexBody body = ball2(2, 0, 1.5);
    const ConvexBody poly =
        Polytope{{hs2(1, 0, 0.2), hs2(0, 1, -3), hs2(1, 1, 0.5)}};
    for (const auto& b : {body, poly}) {
        long tested = 0;
        while (tested < 10000) {
            Vector x = vec2(2 + 3 * rng.normal(), 3 * rng.normal());
            Vector y = vec2(2 + 3 * rng.normal(), 3 * rng.normal());
            if (!contains(b, x) || !contains(b, y)) continue;
            const double t = rng.uniform();
            CHECK(contains(b, t * x + (1 - t) * y));
            ++tested;
        }
    }
}

TEST_CASE("scale closed forms") {
    const ConvexBody b = scale(ball2(2, 0, 1), 3.0);
    const auto& sb = std::get<Ball>(b);
    CHECK(sb.center[0] == 6.0);
    CHECK(sb.radius == 3.0);

    const ConvexBody h = scale(hs2(1, 0, 1), 2.0);
    CHECK(std::get<HalfSpace>(h).offset == 2.0);

    const ConvexBody same = scale(ball2(2, 0, 1), 1.0);
    CHECK(std::get<Ball>(same).center[0] == 2.0);

    CHECK_THROWS_AS(scale(ball2(2, 0, 1), 0.0), Error);
}

TEST_CASE("validate_conditions ball and halfspace") {
    const GaussianModel id = build_gaussian(Matrix::Identity(2, 2));
    CHECK(validate_conditions(ball2(2, 0, 1), id).passed());

    const ValidationReport touching = validate_conditions(ball2(2, 0, 2), id);
    CHECK_FALSE(touching.excludes_origin);
    CHECK(touching.open_convex);
    CHECK(touching.nonempty);

    CHECK(validate_conditions(hs2(1, 0, 1), id).passed());
    CHECK_FALSE(validate_conditions(hs2(1, 0, 0), id).excludes_origin);
    CHECK_FALSE(validate_conditions(hs2(1, 0, -1), id).excludes_origin);
}

TEST_CASE("validate_conditions polytope") {
    const GaussianModel id = build_gaussian(Matrix::Identity(2, 2));

    const Polytope corner{{hs2(1, 0, 1), hs2(0, 1, 1)}};
    const ValidationReport ok = validate_conditions(corner, id);
    CHECK(ok.passed());
    CHECK(ok.min_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));

    const Polytope contradictory{{hs2(1, 0, 1), hs2(-1, 0, 0)}};  // x1>1 and x1<0
    CHECK_THROWS_AS(validate_conditions(contradictory, id), Error);
    try {
        validate_conditions(contradictory, id);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyPolytope);
    }

    // Feasible closure through 0: origin not excluded.
    const Polytope through_zero{{hs2(1, 0, 0), hs2(0, 1, -1)}};
    CHECK_FALSE(validate_conditions(through_zero, id).excludes_origin);
}

TEST_CASE("slice_width ball tangent chord geometry") {
    // D - a0 is a unit ball tangent to {g = 0} at the origin.
    const Ball ball = ball2(2, 0, 1);
    const GaussianModel id = build_gaussian(Matrix::Identity(2, 2));
    const DominatingPoint dp = solve_ball(id, ball);
    const Vector x0 = dp.f_unit;

    const double w = slice_width(ball, dp.a0, dp.v, x0, 0.5);
    CHECK(w == doctest::Approx(std::sqrt(0.75)).epsilon(1e-8));  // 0.86603

    // limiting tangency: width / sqrt(2s) -> 1
    for (double s : {1e-3, 1e-4}) {
        const double ws = slice_width(ball, dp.a0, dp.v, x0, s);
        CHECK(ws / std::sqrt(2.0 * s) == doctest::Approx(1.0).epsilon(2e-2));
    }

    // closed-form agreement across offsets
    for (double s : {0.1, 0.3, 0.7, 1.0, 1.5, 1.99}) {
        const double got = slice_width(ball, dp.a0, dp.v, x0, s);
        const double want = ball_width_oracle(ball, dp.a0, dp.v, x0, s);
        CHECK(got == doctest::Approx(want).epsilon(1e-8));
        CHECK(got == doctest::Approx(std::sqrt(std::max(0.0, 2.0 * s - s * s)))
                         .epsilon(1e-8));
    }
}

TEST_CASE("slice_width halfspace sentinel and oblique closed form") {
    const GaussianModel id = build_gaussian(Matrix::Identity(2, 2));
    const HalfSpace hs = hs2(1, 0, 1);
    const DominatingPoint dp = solve_halfspace(id, hs);
    for (double s : {0.1, 0.25, 0.5}) {
        const double w = slice_width(hs, dp.a0, dp.v, dp.f_unit, s);
        CHECK(std::isinf(w));
    }

    // Oblique axis: probe along x0 not parallel to the normal.
    const Vector x0 = vec2(1, 1).normalized();
    const Vector v = vec2(1, 3);  // slice plane {<v,y> = 0}, <v,x0> > 0
    for (double s : {0.1, 0.5, 1.0}) {
        const double got = slice_width(hs, dp.a0, v, x0, s);
        const double want = hs_width_oracle(hs, dp.a0, v, x0, s);
        CHECK(got == doctest::Approx(want).epsilon(1e-8));
        CHECK(std::isfinite(got));
    }

    CHECK_THROWS_AS(slice_width(hs, dp.a0, vec2(1, 0), vec2(-1, 0), 0.1), Error);
}

TEST_CASE("slice_width polytope takes the tightest constraint") {
    const GaussianModel id = build_gaussian(Matrix::Identity(2, 2));
    const Polytope poly{{hs2(1, 0, 1), hs2(1, 1, 0.5)}};
    const DominatingPoint dp = solve_polytope(id, poly);
    for (double s : {0.1, 0.4, 0.8}) {
        const double got = slice_width(poly, dp.a0, dp.v, dp.f_unit, s);
        const double want =
            std::min(hs_width_oracle(poly.constraints[0], dp.a0, dp.v, dp.f_unit, s),
                     hs_width_oracle(poly.constraints[1], dp.a0, dp.v, dp.f_unit, s));
        CHECK(got == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("check_slice_domination on the unit ball") {
    const GaussianModel id = build_gaussian(Matrix::Identity(2, 2));
    const Ball ball = ball2(2, 0, 1);
    const DominatingPoint dp = solve_ball(id, ball);
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.5 * i / 20.0);

    // width sqrt(2s - s^2) >= sqrt(s) iff s <= 1
    SliceSpec ok{SliceSpec::Kind::Sqrt, 1.0, 0.5};
    const SliceReport pass = check_slice_domination(ball, dp, ok, grid);
    CHECK(pass.dominated);
    CHECK(pass.rows.size() == 20);
    for (const auto& row : pass.rows) CHECK(row.margin >= 0.0);

    // beta = 2 fails at small s: sqrt(2s) < 2 sqrt(s)
    SliceSpec tight{SliceSpec::Kind::Sqrt, 2.0, 0.5};
    CHECK_FALSE(check_slice_domination(ball, dp, tight, grid).dominated);

    // half-space: infinite slices dominate anything
    const HalfSpace hs = hs2(1, 0, 1);
    const DominatingPoint dph = solve_halfspace(id, hs);
    SliceSpec log_spec{SliceSpec::Kind::SqrtLog, 5.0, 0.4};
    CHECK(check_slice_domination(hs, dph, log_spec, grid).dominated);
}

TEST_CASE("error taxonomy maps to exit-code classes") {
    CHECK(is_numerical_failure(Errc::NoConvergence));
    CHECK(is_numerical_failure(Errc::DegenerateG2));
    CHECK(is_numerical_failure(Errc::SupportViolation));
    CHECK_FALSE(is_numerical_failure(Errc::TooLarge));
    CHECK_FALSE(is_numerical_failure(Errc::InvalidSet));
    CHECK_FALSE(is_numerical_failure(Errc::NotPositiveDefinite));
    CHECK_FALSE(is_numerical_failure(Errc::InvalidConfig));
}

TEST_CASE("sqrt_log tau evaluates the stated form") {
    SliceSpec spec{SliceSpec::Kind::SqrtLog, 2.0, 0.5};
    const double s = 0.1;
    CHECK(spec.tau(s) ==
          doctest::Approx(2.0 * std::sqrt(s * std::abs(std::log(s)))).epsilon(1e-14));
}
