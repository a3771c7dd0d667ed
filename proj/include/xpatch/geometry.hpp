#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "xpatch/image.hpp"
#include "xpatch/types.hpp"

namespace xpatch::geometry {

inline constexpr int kDefaultSamplesPerSegment = 32;

/// Closed patch outline made of n spline segments. Segment i runs from
/// anchors[i] to anchors[(i + 1) % n].
struct ClosedContour {
    std::vector<std::vector<Point2>> segments;
    std::vector<AnchorPoint> anchors;

    /// Polygon vertices of the loop, without the repeated closing vertex.
    std::vector<Point2> loop() const;

    /// Wraps a hand-built polygon as a single-segment contour (test fixtures, baselines).
    static ClosedContour from_polygon(std::vector<Point2> vertices);
};

/// The n points where the sector rays cut the circle. E_0 lies straight
/// "down" from the center (+y), later points proceed with decreasing angle.
std::vector<Point2> equal_points(Point2 center, double radius, int n);

/// Midpoints of consecutive equal points; all lie at radius*cos(pi/n).
std::vector<AnchorPoint> initial_anchors(Point2 center, double radius, int n);

/// Centripetal (alpha = 0.5) Catmull-Rom curve from p1 to p2, `samples` points
/// including both endpoints exactly.
std::vector<Point2> spline_segment(Point2 p0, Point2 p1, Point2 p2, Point2 p3, int samples);

ClosedContour close_contour(std::span<const AnchorPoint> anchors,
                            int samples_per_segment = kDefaultSamplesPerSegment);

/// Even-odd fill of the closed loop, sampled at cell centers, clipped to the
/// frame. Rows are filled in parallel.
BinaryMask rasterize(const ClosedContour& contour, int height, int width);
BinaryMask rasterize_polygon(std::span<const Point2> vertices, int height, int width);

/// True iff no two non-adjacent loop edges touch or cross.
bool contour_is_simple(const ClosedContour& contour);
bool polygon_is_simple(std::span<const Point2> vertices);

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

/// Signed shoelace area (positive for counter-clockwise in a y-up frame).
double polygon_area(std::span<const Point2> vertices);

/// Cutting template: one "x y" pair per line.
void write_polygon_text(std::ostream& os, const ClosedContour& contour);

}  // namespace xpatch::geometry
