#include "moddev/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "moddev/dominating.hpp"
#include "moddev/errors.hpp"

namespace moddev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const ConvexBody& body, const Vector& x) {
    if (x.size() != body_dim(body))
        fail(Errc::DimensionMismatch, "point dimension " + std::to_string(x.size()) +
                                          " vs body dimension " +
                                          std::to_string(body_dim(body)));
}

// Some unit vector orthogonal to u (d >= 2).
Vector orthogonal_unit(const Vector& u) {
    const int d = static_cast<int>(u.size());
    int k = 0;
    u.cwiseAbs().minCoeff(&k);
    Vector e = Vector::Zero(d);
    e[k] = 1.0;
    Vector w = e - u.dot(e) * u;
    const double n = w.norm();
    if (n < 1e-14) {
        e.setZero();
        e[(k + 1) % d] = 1.0;
        w = e - u.dot(e) * u;
    }
    return w / w.norm();
}

// Worst-case probe points on the rim of the slice disk of radius r at
// offset p = s*x0, one per half-space constraint (the direction that
// minimizes the constraint slack), plus the single worst direction for a
// ball. Membership of all probes in the closure is equivalent to the whole
// closed disk fitting inside the closure of E = D - a0.
struct SliceProbe {
    const ConvexBody& body;
    const Vector& a0;
    Vector vhat;
    Vector p;  // s * x0

    bool disk_fits(double r) const {
        const auto in_closure = [&](const Vector& y) {
            return contains_closure(body, a0 + p + y);
        };
        if (const auto* hs = std::get_if<HalfSpace>(&body)) {
            return hs_fits(*hs, r, in_closure);
        }
        if (const auto* ball = std::get_if<Ball>(&body)) {
            Vector u = p - (ball->center - a0);
            Vector upar = u - vhat.dot(u) * vhat;
            const double n = upar.norm();
            Vector dir = n > 1e-14 * (1.0 + u.norm()) ? Vector(upar / n)
                                                      : orthogonal_unit(vhat);
            return in_closure(r * dir);
        }
        const auto& poly = std::get<Polytope>(body);
        for (const auto& hs : poly.constraints)
            if (!hs_fits(hs, r, in_closure)) return false;
        return true;
    }

    template <typename F>
    bool hs_fits(const HalfSpace& hs, double r, const F& in_closure) const {
        Vector wpar = hs.normal - vhat.dot(hs.normal) * vhat;
        const double n = wpar.norm();
        if (n <= 1e-14 * hs.normal.norm()) {
            // Constraint normal aligned with v: the slice plane is parallel
            // to the constraint boundary, any radius behaves the same.
            return in_closure(Vector::Zero(vhat.size()));
        }
        return in_closure(-(r / n) * wpar);
    }
};

}  // namespace

void check_structure(const ConvexBody& body) {
    if (const auto* hs = std::get_if<HalfSpace>(&body)) {
        if (hs->normal.size() == 0 || hs->normal.norm() == 0.0)
            fail(Errc::InvalidConfig, "half-space normal must be nonzero");
        if (!hs->normal.allFinite() || !std::isfinite(hs->offset))
            fail(Errc::InvalidConfig, "half-space has non-finite data");
    } else if (const auto* ball = std::get_if<Ball>(&body)) {
        if (ball->center.size() == 0 || !ball->center.allFinite())
            fail(Errc::InvalidConfig, "ball center must be finite and nonempty");
        if (!(ball->radius > 0.0))
            fail(Errc::InvalidConfig, "ball radius must be positive");
    } else {
        const auto& poly = std::get<Polytope>(body);
        if (poly.constraints.empty())
            fail(Errc::InvalidConfig, "polytope needs at least one constraint");
        const auto d = poly.constraints.front().normal.size();
        for (const auto& hs : poly.constraints) {
            check_structure(ConvexBody(hs));
            if (hs.normal.size() != d)
                fail(Errc::DimensionMismatch, "polytope constraints disagree on dimension");
        }
    }
}

int body_dim(const ConvexBody& body) {
    return std::visit(
        [](const auto& b) -> int {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, HalfSpace>)
                return static_cast<int>(b.normal.size());
            else if constexpr (std::is_same_v<T, Ball>)
                return static_cast<int>(b.center.size());
            else
                return static_cast<int>(b.constraints.front().normal.size());
        },
        body);
}

std::string body_kind(const ConvexBody& body) {
    if (std::holds_alternative<HalfSpace>(body)) return "halfspace";
    if (std::holds_alternative<Ball>(body)) return "ball";
    return "polytope";
}

bool contains(const ConvexBody& body, const Vector& x) {
    check_dim(body, x);
    return std::visit(
        [&](const auto& b) -> bool {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, HalfSpace>)
                return b.normal.dot(x) > b.offset;
            else if constexpr (std::is_same_v<T, Ball>)
                return (x - b.center).norm() < b.radius;
            else {
                for (const auto& hs : b.constraints)
                    if (!(hs.normal.dot(x) > hs.offset)) return false;
                return true;
            }
        },
        body);
}

bool contains_closure(const ConvexBody& body, const Vector& x) {
    check_dim(body, x);
    return std::visit(
        [&](const auto& b) -> bool {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, HalfSpace>)
                return b.normal.dot(x) >= b.offset;
            else if constexpr (std::is_same_v<T, Ball>)
                return (x - b.center).norm() <= b.radius;
            else {
                for (const auto& hs : b.constraints)
                    if (!(hs.normal.dot(x) >= hs.offset)) return false;
                return true;
            }
        },
        body);
}

ConvexBody scale(const ConvexBody& body, double t) {
    if (!(t > 0.0)) fail(Errc::InvalidConfig, "scale factor must be positive");
    return std::visit(
        [&](const auto& b) -> ConvexBody {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, HalfSpace>)
                return HalfSpace{b.normal, t * b.offset};
            else if constexpr (std::is_same_v<T, Ball>)
                return Ball{t * b.center, t * b.radius};
            else {
                Polytope out;
                out.constraints.reserve(b.constraints.size());
                for (const auto& hs : b.constraints)
                    out.constraints.push_back({hs.normal, t * hs.offset});
                return out;
            }
        },
        body);
}

ValidationReport validate_conditions(const ConvexBody& body,
                                     const GaussianModel& model) {
    check_structure(body);
    if (body_dim(body) != model.dim)
        fail(Errc::DimensionMismatch, "body dimension vs model dimension");

    ValidationReport rep;
    rep.open_convex = true;  // every supported variant is open convex

    if (const auto* hs = std::get_if<HalfSpace>(&body)) {
        rep.nonempty = true;
        rep.min_norm = std::max(0.0, hs->offset / hs->normal.norm());
        rep.excludes_origin = hs->offset > 0.0;
        if (!rep.excludes_origin) rep.detail = "origin lies in the closed half-space";
        return rep;
    }
    if (const auto* ball = std::get_if<Ball>(&body)) {
        rep.nonempty = true;
        rep.min_norm = std::max(0.0, ball->center.norm() - ball->radius);
        rep.excludes_origin = ball->center.norm() > ball->radius;
        if (!rep.excludes_origin) rep.detail = "|center| <= radius, origin in closure";
        return rep;
    }

    // Polytope: min-norm point of the closure via the dominating-point
    // solver with Sigma = I; EmptyPolytope propagates from the solver.
    const auto& poly = std::get<Polytope>(body);
    GaussianModel iso = build_gaussian(Matrix::Identity(model.dim, model.dim));
    rep.min_norm = detail::polytope_min_rate_point(iso, poly).norm();

    double scale_hint = 0.0;
    for (const auto& hs : poly.constraints)
        scale_hint = std::max(scale_hint, std::abs(hs.offset) / hs.normal.norm());
    const double origin_tol = 1e-8 * (1.0 + scale_hint);
    rep.excludes_origin = rep.min_norm > origin_tol;
    if (!rep.excludes_origin) rep.detail = "min-norm point of closure within tolerance of 0";

    // Interior nonemptiness: feasibility of a slack-tightened copy.
    const double eps = 1e-9 * (1.0 + scale_hint);
    Polytope tightened = poly;
    for (auto& hs : tightened.constraints) hs.offset += eps * hs.normal.norm();
    try {
        (void)detail::polytope_min_rate_point(iso, tightened);
        rep.nonempty = true;
    } catch (const Error& e) {
        if (e.code() != Errc::EmptyPolytope) throw;
        rep.nonempty = false;
        rep.detail = "closure feasible but interior empty at tolerance";
    }
    return rep;
}

double SliceSpec::tau(double s) const {
    if (kind == Kind::Sqrt) return beta * std::sqrt(s);
    return beta * std::sqrt(s * std::abs(std::log(s)));
}

double slice_width(const ConvexBody& body, const Vector& a0, const Vector& v,
                   const Vector& x0, double s) {
    check_structure(body);
    check_dim(body, a0);
    check_dim(body, v);
    check_dim(body, x0);
    if (!(s > 0.0)) fail(Errc::InvalidConfig, "slice offset s must be positive");
    if (!(v.dot(x0) > 0.0))
        fail(Errc::InvalidAxis, "<v, x0> must be positive");

    SliceProbe probe{body, a0, v / v.norm(), s * x0};

    if (!probe.disk_fits(0.0)) return 0.0;

    // Expand to bracket the failure radius; call the slice unbounded once it
    // survives far beyond any finite geometry of the body.
    double scale_hint = 1.0 + a0.norm() + probe.p.norm();
    if (const auto* ball = std::get_if<Ball>(&body))
        scale_hint += ball->center.norm() + ball->radius;
    double lo = 0.0, hi = 1.0;
    const double unbounded_at = 1e12 * scale_hint;
    while (probe.disk_fits(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > unbounded_at) return kInf;
    }
    const double tol = 1e-12 * scale_hint;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (probe.disk_fits(mid))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

SliceReport check_slice_domination(const ConvexBody& body,
                                   const DominatingPoint& dp,
                                   const SliceSpec& spec,
                                   const std::vector<double>& grid) {
    if (!(spec.beta > 0.0) || !(spec.delta > 0.0))
        fail(Errc::InvalidConfig, "slice spec needs beta > 0 and delta > 0");
    SliceReport rep;
    rep.dominated = true;
    for (double s : grid) {
        if (!(s > 0.0) || s > spec.delta) continue;
        SliceMargin row;
        row.s = s;
        row.width = slice_width(body, dp.a0, dp.v, dp.f_unit, s);
        row.tau = spec.tau(s);
        row.margin = row.width - row.tau;
        if (!(row.width >= row.tau)) rep.dominated = false;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace moddev
