#include "xpatch/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xpatch/geometry.hpp"

namespace xpatch::boundary {

double Line::norm() const { return std::hypot(a, b); }

Box scale_box(const Box& box, double factor) {
    Point2 c = box.center();
    double hw = box.width() * factor / 2, hh = box.height() * factor / 2;
    return {c.x - hw, c.y - hh, c.x + hw, c.y + hh};
}

FeasibleRegion build_region(Point2 center, double radius, double inner_fraction, int n,
                            const Box& detection_box, double shrink) {
    if (n < 4) throw GeometryError("build_region: need at least 4 sectors");
    if (!(radius > 0)) throw GeometryError("build_region: radius must be positive");
    if (!(inner_fraction > 0 && inner_fraction <= 0.5))
        throw GeometryError("build_region: inner_fraction must lie in (0, 0.5]");
    if (!(shrink > 0 && shrink <= 1)) throw GeometryError("build_region: shrink must lie in (0, 1]");
    if (inner_fraction >= std::cos(std::numbers::pi / n))
        throw GeometryError("build_region: inner circle swallows the initial anchors");

    FeasibleRegion reg;
    reg.center = center;
    reg.radius = radius;
    reg.inner_radius = inner_fraction * radius;
    reg.n = n;
    reg.equal_points = geometry::equal_points(center, radius, n);
    reg.outer = scale_box(detection_box, shrink);
    if (!(reg.outer.width() > 0 && reg.outer.height() > 0))
        throw GeometryError("build_region: degenerate outer rectangle");

    reg.lines.reserve(n);
    for (int j = 0; j < n; ++j) {
        // Ray direction u = E_j - C (unit); sectors are visited with decreasing angle,
        // so the traversal-side normal is u rotated by -90 degrees.
        double theta = std::numbers::pi / 2 - 2 * std::numbers::pi * j / n;
        double nx = std::sin(theta), ny = -std::cos(theta);
        reg.lines.push_back({nx, ny, -(nx * center.x + ny * center.y)});
    }

    for (Point2 a : geometry::initial_anchors(center, radius, n)) {
        if (!reg.outer.contains(a))
            throw GeometryError("build_region: outer rectangle excludes the initial anchors");
    }
    return reg;
}

Box FeasibleRegion::anchor_bounds(int j) const {
    Point2 a = equal_points[j] - center, b = equal_points[(j + 1) % n] - center;
    // The sector is unbounded; use the outer rectangle corners projected on its rays.
    double reach = std::hypot(std::max(std::abs(outer.x1 - center.x), std::abs(outer.x2 - center.x)),
                              std::max(std::abs(outer.y1 - center.y), std::abs(outer.y2 - center.y)));
    double s = reach / radius;
    double xs[] = {center.x, center.x + s * a.x, center.x + s * b.x};
    double ys[] = {center.y, center.y + s * a.y, center.y + s * b.y};
    Box bb{*std::min_element(xs, xs + 3), *std::min_element(ys, ys + 3), *std::max_element(xs, xs + 3),
           *std::max_element(ys, ys + 3)};
    return {std::max(bb.x1, outer.x1), std::max(bb.y1, outer.y1), std::min(bb.x2, outer.x2),
            std::min(bb.y2, outer.y2)};
}

SignedDistances signed_distances(const FeasibleRegion& region, int j, Point2 p) {
    const Line& l = region.lines[j];
    const Line& r = region.lines[(j + 1) % region.n];
    return {l.eval(p) / l.norm(), r.eval(p) / r.norm()};
}

FeasibilityVerdict feasible(const FeasibleRegion& region, int j, Point2 p) {
    FeasibilityVerdict v;
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return v;
    auto [left, right] = signed_distances(region, j, p);
    // L*R < 0 holds in the sector and in its vertically opposite wedge; the sign
    // pair picks out the sector itself.
    v.sector_ok = left * right < 0 && left > 0;
    v.annulus_ok = distance(p, region.center) > region.inner_radius;
    v.outer_ok = region.outer.contains(p);
    return v;
}

Point2 repair(const FeasibleRegion& region, int j, Point2 proposed, Point2 fallback) {
    if (!feasible(region, j, fallback).rho())
        throw std::invalid_argument("repair: fallback point is not feasible");
    if (feasible(region, j, proposed).rho()) return proposed;
    if (!std::isfinite(proposed.x) || !std::isfinite(proposed.y)) return fallback;
    Point2 q = proposed;
    for (int step = 0; step < kRepairSteps; ++step) {
        q = 0.5 * (q + fallback);
        if (feasible(region, j, q).rho()) return q;
    }
    return fallback;
}

}  // namespace xpatch::boundary
