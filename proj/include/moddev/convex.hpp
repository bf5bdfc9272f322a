#ifndef MODDEV_CONVEX_HPP
#define MODDEV_CONVEX_HPP

#include <string>
#include <variant>
#include <vector>

#include "moddev/gaussian.hpp"

namespace moddev {

/// Open half-space {x : <normal, x> > offset}.
struct HalfSpace {
    Vector normal;
    double offset = 0.0;
};

/// Open ball {x : ||x - center|| < radius}.
struct Ball {
    Vector center;
    double radius = 0.0;
};

/// Open intersection of half-spaces.
struct Polytope {
    std::vector<HalfSpace> constraints;
};

using ConvexBody = std::variant<HalfSpace, Ball, Polytope>;

/// Structural validation (nonzero normal, positive radius, nonempty and
/// dimensionally consistent constraint list). Throws on violation.
void check_structure(const ConvexBody& body);

int body_dim(const ConvexBody& body);
std::string body_kind(const ConvexBody& body);

/// Open membership (strict inequalities).
bool contains(const ConvexBody& body, const Vector& x);

/// Closure membership (non-strict inequalities).
bool contains_closure(const ConvexBody& body, const Vector& x);

/// The scaled set tD, t > 0.
ConvexBody scale(const ConvexBody& body, double t);

/// Standing-assumption report: D open convex (structural), D nonempty,
/// and 0 outside the closure of D. In R^d the intersection condition with
/// the generating Hilbert space reduces to nonemptiness.
struct ValidationReport {
    bool open_convex = false;
    bool nonempty = false;
    bool excludes_origin = false;
    double min_norm = 0.0;  // distance from 0 to the closure of D
    std::string detail;

    bool passed() const { return open_convex && nonempty && excludes_origin; }
};

ValidationReport validate_conditions(const ConvexBody& body,
                                     const GaussianModel& model);

/// Slice diameter lower-bound specification tau(s): kind `sqrt` encodes
/// beta * s^{1/2}, kind `sqrt_log` encodes beta * (s |log s|)^{1/2};
/// probed on (0, delta].
struct SliceSpec {
    enum class Kind { Sqrt, SqrtLog };
    Kind kind = Kind::Sqrt;
    double beta = 1.0;
    double delta = 0.5;

    double tau(double s) const;
};

/// Largest r >= 0 such that the whole disk {y : <v,y> = 0, ||y|| <= r},
/// shifted by s*x0, sits inside D - a0. Returns +infinity when the slice
/// is unbounded (half-spaces aligned with v). Computed by bisection with
/// worst-case direction probes.
double slice_width(const ConvexBody& body, const Vector& a0, const Vector& v,
                   const Vector& x0, double s);

struct SliceMargin {
    double s = 0.0;
    double width = 0.0;  // may be +infinity
    double tau = 0.0;
    double margin = 0.0;  // width - tau
};

struct SliceReport {
    bool dominated = false;
    std::vector<SliceMargin> rows;
};

struct DominatingPoint;  // dominating.hpp

/// Checks Definition-1 style slice domination along the axis x0 = f_unit:
/// slice_width(s) >= tau(s) on every grid point in (0, delta].
SliceReport check_slice_domination(const ConvexBody& body,
                                   const DominatingPoint& dp,
                                   const SliceSpec& spec,
                                   const std::vector<double>& grid);

}  // namespace moddev

#endif
