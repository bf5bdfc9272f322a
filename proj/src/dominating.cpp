#include "moddev/dominating.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "moddev/errors.hpp"

namespace moddev {

namespace {

// Derived quantities shared by all solvers. v solves Sigma v = a0, so the
// identities Sigma v = a0, sigma_g^2 = <v, a0> = 2 lambda and g(a0) =
// sigma_g^2 hold up to factorization roundoff.
DominatingPoint finish(const GaussianModel& model, const Vector& a0,
                       double kkt_residual) {
    DominatingPoint dp;
    dp.a0 = a0;
    dp.v = Eigen::LLT<Matrix>(model.covariance).solve(a0);
    dp.sigma_g2 = dp.v.dot(a0);
    dp.lambda_star = 0.5 * dp.sigma_g2;
    dp.t0 = dp.v.norm();
    if (!(dp.t0 > 0.0))
        fail(Errc::InvalidSet, "dominating point at the origin (0 in closure of D)");
    dp.f_unit = dp.v / dp.t0;
    dp.kkt_residual = kkt_residual;
    dp.covariance = model.covariance;
    return dp;
}

struct WhitenedConstraint {
    Vector w;  // L^T v_i
    double c;
};

// Projection of z onto the closed half-space {u : <w,u> >= c}.
Vector project_halfspace(const Vector& z, const WhitenedConstraint& hc) {
    const double slack = hc.w.dot(z) - hc.c;
    if (slack >= 0.0) return z;
    return z - slack * hc.w / hc.w.squaredNorm();
}

// Nonnegative least squares fit of Sigma^{-1} x on the active normals,
// by iteratively dropping the most negative multiplier.
double kkt_certificate(const Matrix& normals, const Vector& target,
                       std::vector<double>* mults_out) {
    const int m = static_cast<int>(normals.cols());
    std::vector<int> keep(m);
    for (int i = 0; i < m; ++i) keep[i] = i;
    Vector mu;
    while (true) {
        if (keep.empty()) {
            mu.resize(0);
            break;
        }
        Matrix sub(normals.rows(), keep.size());
        for (size_t k = 0; k < keep.size(); ++k) sub.col(k) = normals.col(keep[k]);
        mu = sub.colPivHouseholderQr().solve(target);
        int worst = -1;
        double worst_val = -1e-12;
        for (int k = 0; k < mu.size(); ++k)
            if (mu[k] < worst_val) {
                worst_val = mu[k];
                worst = k;
            }
        if (worst < 0) break;
        keep.erase(keep.begin() + worst);
    }
    Vector fit = Vector::Zero(normals.rows());
    if (mults_out) mults_out->assign(m, 0.0);
    for (size_t k = 0; k < keep.size(); ++k) {
        const double v = std::max(0.0, mu[static_cast<int>(k)]);
        fit += v * normals.col(keep[k]);
        if (mults_out) (*mults_out)[keep[k]] = v;
    }
    return (target - fit).norm();
}

}  // namespace

namespace detail {

// Minimizer of x^T Sigma^{-1} x / 2 over the closed polyhedron, i.e. the
// projection of the origin in the whitened metric, via Dykstra. Returns the
// point without any origin-exclusion check so validators can reuse it.
Vector polytope_min_rate_point(const GaussianModel& model, const Polytope& poly,
                               long max_cycles) {
    check_structure(ConvexBody(poly));
    if (body_dim(ConvexBody(poly)) != model.dim)
        fail(Errc::DimensionMismatch, "polytope dimension vs model dimension");

    const int d = model.dim;
    const int m = static_cast<int>(poly.constraints.size());
    std::vector<WhitenedConstraint> cons(m);
    double scale_hint = 1.0;
    for (int i = 0; i < m; ++i) {
        cons[i].w = model.lower_factor.transpose() * poly.constraints[i].normal;
        cons[i].c = poly.constraints[i].offset;
        scale_hint = std::max(scale_hint, std::abs(cons[i].c) / cons[i].w.norm());
    }

    Vector u = Vector::Zero(d);
    std::vector<Vector> corr(m, Vector::Zero(d));
    const double move_tol = 1e-14 * scale_hint;
    const double feas_tol = 1e-11 * scale_hint;

    auto violation = [&](const Vector& z) {
        double worst = 0.0;
        for (const auto& hc : cons)
            worst = std::max(worst, (hc.c - hc.w.dot(z)) / hc.w.norm());
        return worst;
    };

    for (long cycle = 0; cycle < max_cycles; ++cycle) {
        double moved = 0.0;
        for (int i = 0; i < m; ++i) {
            Vector z = u + corr[i];
            Vector y = project_halfspace(z, cons[i]);
            corr[i] = z - y;
            moved = std::max(moved, (y - u).norm());
            u = y;
        }
        if (moved < move_tol && violation(u) < feas_tol) break;
        if (cycle == max_cycles - 1) {
            if (violation(u) > 1e-6 * scale_hint)
                fail(Errc::EmptyPolytope, "closure of the polytope is infeasible");
            fail(Errc::NoConvergence,
                 "Dykstra projection did not reach tolerance in " +
                     std::to_string(max_cycles) + " cycles");
        }
    }
    return model.lower_factor * u;
}

}  // namespace detail

DominatingPoint solve_halfspace(const GaussianModel& model, const HalfSpace& hs) {
    check_structure(ConvexBody(hs));
    if (hs.normal.size() != model.dim)
        fail(Errc::DimensionMismatch, "half-space dimension vs model dimension");
    if (!(hs.offset > 0.0))
        fail(Errc::InvalidSet, "0 lies in the closed half-space (offset <= 0)");

    const Vector sw = model.covariance * hs.normal;
    const double quad = hs.normal.dot(sw);  // w^T Sigma w > 0
    const Vector a0 = (hs.offset / quad) * sw;

    DominatingPoint dp = finish(model, a0, 0.0);
    // Residual of Sigma^{-1} a0 = mu * w with the fitted multiplier.
    const double mu = dp.v.dot(hs.normal) / hs.normal.squaredNorm();
    dp.kkt_residual = (dp.v - mu * hs.normal).norm();
    return dp;
}

DominatingPoint solve_ball(const GaussianModel& model, const Ball& ball) {
    check_structure(ConvexBody(ball));
    if (ball.center.size() != model.dim)
        fail(Errc::DimensionMismatch, "ball dimension vs model dimension");
    const double na = ball.center.norm();
    if (!(na > ball.radius))
        fail(Errc::InvalidSet, "0 lies in the closed ball (|center| <= radius)");

    const int d = model.dim;
    const Vector& a = ball.center;
    const double R = ball.radius;

    // KKT multiplier equation: x(mu) = mu (Sigma^{-1} + mu I)^{-1} a;
    // ||x(mu) - a|| decreases monotonically from ||a|| to 0, so bisect.
    auto x_of_mu = [&](double mu) -> Vector {
        Matrix k = model.inverse + mu * Matrix::Identity(d, d);
        return mu * Eigen::LLT<Matrix>(k).solve(a);
    };
    auto dist = [&](double mu) { return (x_of_mu(mu) - a).norm(); };

    double lo = 1e-12;
    double hi = 1.0;
    long guard = 0;
    while (dist(hi) >= R) {
        hi *= 2.0;
        if (++guard > 600)
            fail(Errc::NoConvergence, "ball multiplier bracket expansion failed");
    }
    if (dist(lo) < R) lo = 1e-18;  // extremely flat rate; retighten bracket
    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dist(mid) >= R)
            lo = mid;
        else
            hi = mid;
    }
    Vector a0 = x_of_mu(0.5 * (lo + hi));
    // Radial polish puts a0 on the sphere exactly (up to rounding).
    a0 = a + (a0 - a) * (R / (a0 - a).norm());

    DominatingPoint dp = finish(model, a0, 0.0);
    const Vector dir = a - a0;
    if (!(dp.v.dot(dir) > 0.0))
        fail(Errc::NoConvergence, "ball solver: supporting hyperplane check failed");
    const double mu = dp.v.dot(dir) / dir.squaredNorm();
    dp.kkt_residual = (dp.v - mu * dir).norm();
    return dp;
}

DominatingPoint solve_polytope(const GaussianModel& model, const Polytope& poly,
                               long max_cycles) {
    const Vector a0 = detail::polytope_min_rate_point(model, poly, max_cycles);

    double scale_hint = 1.0;
    for (const auto& hs : poly.constraints)
        scale_hint = std::max(scale_hint, std::abs(hs.offset) / hs.normal.norm());
    if (a0.norm() <= 1e-8 * scale_hint)
        fail(Errc::InvalidSet, "0 lies in the closure of the polytope");

    DominatingPoint dp = finish(model, a0, 0.0);

    // Active set: every constraint with slack below tolerance participates.
    std::vector<int> active;
    const int m = static_cast<int>(poly.constraints.size());
    for (int i = 0; i < m; ++i) {
        const auto& hs = poly.constraints[i];
        const double slack = hs.normal.dot(a0) - hs.offset;
        if (slack < 1e-9 * hs.normal.norm() * (1.0 + a0.norm())) active.push_back(i);
    }
    if (active.empty())
        fail(Errc::NoConvergence, "polytope minimizer has no active constraint");
    Matrix normals(model.dim, active.size());
    for (size_t k = 0; k < active.size(); ++k)
        normals.col(k) = poly.constraints[active[k]].normal;
    dp.kkt_residual = kkt_certificate(normals, dp.v, nullptr);
    if (dp.kkt_residual >= 1e-9 * (1.0 + dp.v.norm()))
        fail(Errc::NoConvergence,
             "KKT residual " + std::to_string(dp.kkt_residual) + " above tolerance");
    return dp;
}

DominatingPoint solve_dominating(const GaussianModel& model, const ConvexBody& body) {
    return std::visit(
        [&](const auto& b) -> DominatingPoint {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, HalfSpace>)
                return solve_halfspace(model, b);
            else if constexpr (std::is_same_v<T, Ball>)
                return solve_ball(model, b);
            else
                return solve_polytope(model, b);
        },
        body);
}

SupportReport verify_support(const GaussianModel& model, const ConvexBody& body,
                             const DominatingPoint& dp, long samples,
                             std::uint64_t seed) {
    if (body_dim(body) != model.dim)
        fail(Errc::DimensionMismatch, "body dimension vs model dimension");
    const int d = model.dim;

    double reach = 1.0;
    if (const auto* ball = std::get_if<Ball>(&body))
        reach = 2.0 * ball->radius;
    else if (const auto* hs = std::get_if<HalfSpace>(&body))
        reach = 1.0 + std::abs(hs->offset) / hs->normal.norm();
    else
        for (const auto& hs : std::get<Polytope>(body).constraints)
            reach = std::max(reach, 1.0 + std::abs(hs.offset) / hs.normal.norm());

    Rng rng(seed);
    const double ga0 = dp.g(dp.a0);
    SupportReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    long accepted = 0;
    const long max_attempts = 200 * samples;
    for (long attempt = 0; attempt < max_attempts && accepted < samples; ++attempt) {
        Vector u(d);
        for (int i = 0; i < d; ++i) u[i] = rng.normal();
        const double r = reach * std::abs(rng.normal());
        Vector x = dp.a0 + (r / u.norm()) * u;
        if (!contains(body, x)) continue;
        ++accepted;
        const double margin = dp.g(x) - ga0;
        rep.min_margin = std::min(rep.min_margin, margin);
        if (margin < -1e-9) {
            std::ostringstream os;
            os << "g(x) < g(a0) - 1e-9 at witness x = [" << x.transpose() << "]";
            fail(Errc::SupportViolation, os.str());
        }
    }
    rep.samples = accepted;
    if (accepted == 0)
        fail(Errc::NoConvergence, "verify_support: no interior samples accepted");
    return rep;
}

}  // namespace moddev
