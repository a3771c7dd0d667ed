#pragma once

#include <vector>

#include "xpatch/types.hpp"

namespace xpatch::boundary {

/// Line a*x + b*y + c = 0 with (a, b) unit length.
struct Line {
    double a = 0, b = 0, c = 0;
    double norm() const;
    double eval(Point2 p) const { return a * p.x + b * p.y + c; }
};

/// Per-anchor feasible regions for one patch: sector between adjacent rays,
/// outside the inner circle, inside the outer rectangle.
///
/// Line j passes through the center and equal point E_j. Its normal points in
/// the direction the sectors are traversed, so anchor j's sector is exactly
/// {L_j > 0, R_j < 0}, which in particular gives L_j * R_j < 0.
struct FeasibleRegion {
    Point2 center;
    double radius = 0;
    double inner_radius = 0;
    int n = 0;
    std::vector<Line> lines;
    std::vector<Point2> equal_points;
    Box outer;

    /// Bounding box of sector j clipped to the outer rectangle.
    Box anchor_bounds(int j) const;
};

struct FeasibilityVerdict {
    bool sector_ok = false;
    bool annulus_ok = false;
    bool outer_ok = false;
    int rho() const { return sector_ok && annulus_ok && outer_ok ? 1 : 0; }
};

struct SignedDistances {
    double left = 0;   // to line j
    double right = 0;  // to line j+1
};

/// Outer rectangle = `detection_box` scaled by `shrink` about its center.
FeasibleRegion build_region(Point2 center, double radius, double inner_fraction, int n,
                            const Box& detection_box, double shrink);

Box scale_box(const Box& box, double factor);

/// j is zero-based here (0 <= j < n).
SignedDistances signed_distances(const FeasibleRegion& region, int j, Point2 p);
FeasibilityVerdict feasible(const FeasibleRegion& region, int j, Point2 p);

inline constexpr int kRepairSteps = 8;

/// Returns `proposed` if feasible, otherwise the first feasible point of the
/// midpoint iteration toward `fallback`, otherwise `fallback`.
Point2 repair(const FeasibleRegion& region, int j, Point2 proposed, Point2 fallback);

}  // namespace xpatch::boundary
