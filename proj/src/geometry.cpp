#include "xpatch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "xpatch/reference.hpp"

namespace xpatch::geometry {

std::vector<Point2> ClosedContour::loop() const {
    std::vector<Point2> out;
    for (const auto& seg : segments) {
        if (seg.empty()) continue;
        out.insert(out.end(), seg.begin(), seg.end() - (segments.size() > 1 ? 1 : 0));
    }
    return out;
}

ClosedContour ClosedContour::from_polygon(std::vector<Point2> vertices) {
    ClosedContour c;
    c.anchors = vertices;
    c.segments.push_back(std::move(vertices));
    return c;
}

std::vector<Point2> equal_points(Point2 center, double radius, int n) {
    std::vector<Point2> pts(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        double theta = std::numbers::pi / 2 - 2 * std::numbers::pi * j / n;
        pts[j] = {center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)};
    }
    return pts;
}

std::vector<AnchorPoint> initial_anchors(Point2 center, double radius, int n) {
    if (n < 4) throw GeometryError("initial_anchors: need at least 4 anchors");
    if (!(radius > 0)) throw GeometryError("initial_anchors: radius must be positive");
    auto e = equal_points(center, radius, n);
    std::vector<AnchorPoint> anchors(e.size());
    for (int j = 0; j < n; ++j) anchors[j] = 0.5 * (e[j] + e[(j + 1) % n]);
    return anchors;
}

std::vector<Point2> spline_segment(Point2 p0, Point2 p1, Point2 p2, Point2 p3, int samples) {
    if (samples < 2) throw GeometryError("spline_segment: need at least 2 samples");
    for (Point2 p : {p0, p1, p2, p3})
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw GeometryError("spline_segment: non-finite control point");

    // Knot spacing |P_{k+1} - P_k|^alpha with alpha = 0.5.
    auto knot = [](Point2 a, Point2 b) { return std::sqrt(distance(a, b)); };
    double d01 = knot(p0, p1), d12 = knot(p1, p2), d23 = knot(p2, p3);
    if (d01 == 0 || d12 == 0 || d23 == 0)
        throw GeometryError("spline_segment: coincident consecutive control points");

    double t0 = 0, t1 = d01, t2 = t1 + d12, t3 = t2 + d23;
    auto lerp = [](Point2 a, Point2 b, double ta, double tb, double t) {
        return ((tb - t) / (tb - ta)) * a + ((t - ta) / (tb - ta)) * b;
    };

    std::vector<Point2> out(static_cast<std::size_t>(samples));
    out.front() = p1;
    out.back() = p2;
    for (int k = 1; k + 1 < samples; ++k) {
        double t = t1 + (t2 - t1) * k / (samples - 1);
        Point2 a1 = lerp(p0, p1, t0, t1, t);
        Point2 a2 = lerp(p1, p2, t1, t2, t);
        Point2 a3 = lerp(p2, p3, t2, t3, t);
        Point2 b1 = lerp(a1, a2, t0, t2, t);
        Point2 b2 = lerp(a2, a3, t1, t3, t);
        out[k] = lerp(b1, b2, t1, t2, t);
    }
    return out;
}

ClosedContour close_contour(std::span<const AnchorPoint> anchors, int samples_per_segment) {
    const int n = static_cast<int>(anchors.size());
    if (n < 4) throw GeometryError("close_contour: need at least 4 anchors");
    ClosedContour c;
    c.anchors.assign(anchors.begin(), anchors.end());
    c.segments.reserve(n);
    auto at = [&](int i) { return anchors[((i % n) + n) % n]; };
    for (int i = 0; i < n; ++i)
        c.segments.push_back(spline_segment(at(i - 1), at(i), at(i + 1), at(i + 2), samples_per_segment));
    return c;
}

namespace {

struct Edge {
    Point2 a, b;
    double ymin, ymax;
};

std::vector<Edge> make_edges(std::span<const Point2> v) {
    std::vector<Edge> edges;
    const std::size_t m = v.size();
    edges.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        Point2 a = v[i], b = v[(i + 1) % m];
        if (a.y == b.y) continue;  // never crosses a scanline under the half-open rule
        edges.push_back({a, b, std::min(a.y, b.y), std::max(a.y, b.y)});
    }
    return edges;
}

void fill_row(const std::vector<Edge>& edges, int row, int width, std::vector<double>& xs,
              std::span<std::uint8_t> out) {
    const double py = row + 0.5;
    xs.clear();
    for (const auto& e : edges) {
        if (py < e.ymin || py > e.ymax) continue;
        // Same half-open crossing rule and intercept expression as a per-cell ray cast.
        if ((e.a.y > py) != (e.b.y > py))
            xs.push_back((e.b.x - e.a.x) * (py - e.a.y) / (e.b.y - e.a.y) + e.a.x);
    }
    std::sort(xs.begin(), xs.end());
    // A cell center px is inside iff an odd number of intercepts lie strictly right of it,
    // i.e. px in [xs[2k], xs[2k+1]).
    auto first_col_not_left_of = [width](double x) {
        // smallest c with c + 0.5 >= x
        if (!(x > -1.0)) return 0;
        if (x > width + 1.0) return width;
        int c = static_cast<int>(std::ceil(x - 0.5));
        while (c + 0.5 < x) ++c;
        while (c - 1 + 0.5 >= x) --c;
        return std::clamp(c, 0, width);
    };
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        int c0 = first_col_not_left_of(xs[k]);
        int c1 = first_col_not_left_of(xs[k + 1]);
        for (int c = c0; c < c1; ++c) out[c] ^= 1;
    }
}

}  // namespace

BinaryMask rasterize_polygon(std::span<const Point2> vertices, int height, int width) {
    BinaryMask mask(height, width);
    if (vertices.size() < 3) return mask;
    const auto edges = make_edges(vertices);
#pragma omp parallel
    {
        std::vector<double> xs;
#pragma omp for schedule(static)
        for (int r = 0; r < height; ++r) fill_row(edges, r, width, xs, mask.row(r));
    }
    return mask;
}

BinaryMask rasterize(const ClosedContour& contour, int height, int width) {
    if (height <= 0 || width <= 0) throw GeometryError("rasterize: image dimensions must be positive");
    auto v = contour.loop();
    return rasterize_polygon(v, height, width);
}

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Point2 p, Point2 q, Point2 r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) && std::min(p.y, r.y) <= q.y &&
           q.y <= std::max(p.y, r.y);
}

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
    int o1 = sign(cross(a, b, c)), o2 = sign(cross(a, b, d));
    int o3 = sign(cross(c, d, a)), o4 = sign(cross(c, d, b));
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, c, b)) return true;
    if (o2 == 0 && on_segment(a, d, b)) return true;
    if (o3 == 0 && on_segment(c, a, d)) return true;
    if (o4 == 0 && on_segment(c, b, d)) return true;
    return false;
}

bool polygon_is_simple(std::span<const Point2> v) {
    const std::size_t m = v.size();
    if (m < 3) return false;
    struct Bb {
        double x0, x1, y0, y1;
    };
    std::vector<Bb> bb(m);
    for (std::size_t i = 0; i < m; ++i) {
        Point2 a = v[i], b = v[(i + 1) % m];
        bb[i] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 2; j < m; ++j) {
            if (i == 0 && j == m - 1) continue;  // adjacent through the closing vertex
            if (bb[i].x1 < bb[j].x0 || bb[j].x1 < bb[i].x0 || bb[i].y1 < bb[j].y0 || bb[j].y1 < bb[i].y0)
                continue;
            if (segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m])) return false;
        }
    }
    return true;
}

bool contour_is_simple(const ClosedContour& contour) {
    auto v = contour.loop();
    return polygon_is_simple(v);
}

double polygon_area(std::span<const Point2> v) {
    double a = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point2 p = v[i], q = v[(i + 1) % v.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return a / 2;
}

void write_polygon_text(std::ostream& os, const ClosedContour& contour) {
    auto flags = os.flags();
    os << std::setprecision(17);
    for (Point2 p : contour.loop()) os << p.x << ' ' << p.y << '\n';
    os.flags(flags);
}

}  // namespace xpatch::geometry

namespace xpatch::reference {

BinaryMask rasterize_serial(const geometry::ClosedContour& contour, int height, int width) {
    if (height <= 0 || width <= 0) throw GeometryError("rasterize: image dimensions must be positive");
    auto v = contour.loop();
    BinaryMask mask(height, width);
    if (v.size() < 3) return mask;
    const auto edges = geometry::make_edges(v);
    std::vector<double> xs;
    for (int r = 0; r < height; ++r) geometry::fill_row(edges, r, width, xs, mask.row(r));
    return mask;
}

}  // namespace xpatch::reference
