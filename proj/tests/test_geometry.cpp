#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "xpatch/boundary.hpp"
#include "xpatch/geometry.hpp"
#include "xpatch/reference.hpp"

using namespace xpatch;
using namespace xpatch::geometry;

TEST_SUITE("geometry") {

TEST_CASE("initial anchors are chord midpoints") {
    auto p = initial_anchors({0, 0}, 1.0, 4);
    REQUIRE(p.size() == 4);
    CHECK(p[0].x == doctest::Approx(0.5));
    CHECK(p[0].y == doctest::Approx(0.5));
    for (auto q : p) CHECK(std::hypot(q.x, q.y) == doctest::Approx(std::cos(std::numbers::pi / 4)).epsilon(1e-12));

    auto e = equal_points({0, 0}, 1.0, 4);
    CHECK(e[0].x == doctest::Approx(0.0));
    CHECK(e[0].y == doctest::Approx(1.0));
    CHECK(e[1].x == doctest::Approx(1.0));
    CHECK(e[1].y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("initial anchors scale and translate") {
    auto base = initial_anchors({0, 0}, 1.0, 8);
    auto moved = initial_anchors({10, 20}, 5.0, 8);
    for (int j = 0; j < 8; ++j) {
        CHECK(moved[j].x == doctest::Approx(10 + 5 * base[j].x).epsilon(1e-12));
        CHECK(moved[j].y == doctest::Approx(20 + 5 * base[j].y).epsilon(1e-12));
    }
}

TEST_CASE("initial anchors reject bad input") {
    CHECK_THROWS_AS(initial_anchors({0, 0}, 1.0, 3), GeometryError);
    CHECK_THROWS_AS(initial_anchors({0, 0}, 0.0, 8), GeometryError);
}

TEST_CASE("spline endpoints and collinear case") {
    auto s = spline_segment({0, 0}, {1, 0}, {2, 0}, {3, 0}, 17);
    REQUIRE(s.size() == 17);
    CHECK(s.front() == Point2{1, 0});
    CHECK(s.back() == Point2{2, 0});
    for (auto p : s) {
        CHECK(std::abs(p.y) < 1e-12);
        CHECK(p.x >= 1 - 1e-12);
        CHECK(p.x <= 2 + 1e-12);
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int t = 0; t < 200; ++t) {
        Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)}, d{u(rng), u(rng)};
        auto q = spline_segment(a, b, c, d, 8);
        CHECK(distance(q.front(), b) < 1e-9);
        CHECK(distance(q.back(), c) < 1e-9);
    }
}

TEST_CASE("spline on a square corner does not cross itself") {
    auto s = spline_segment({0, 0}, {1, 0}, {1, 1}, {0, 1}, 64);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) CHECK_FALSE(s[i] == s[j]);
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        for (std::size_t j = i + 2; j + 1 < s.size(); ++j)
            CHECK_FALSE(segments_intersect(s[i], s[i + 1], s[j], s[j + 1]));
}

TEST_CASE("spline rejects degenerate input") {
    CHECK_THROWS_AS(spline_segment({0, 0}, {1, 0}, {1, 0}, {2, 0}, 8), GeometryError);
    CHECK_THROWS_AS(spline_segment({0, 0}, {1, 0}, {2, 0}, {3, 0}, 1), GeometryError);
    CHECK_THROWS_AS(spline_segment({0, 0}, {NAN, 0}, {2, 0}, {3, 0}, 8), GeometryError);
}

TEST_CASE("closed contour structure") {
    auto a = initial_anchors({50, 50}, 20, 8);
    auto c = close_contour(a, 32);
    REQUIRE(c.segments.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(c.segments[i].front() == a[i]);
        CHECK(c.segments[i].back() == a[(i + 1) % 8]);
        CHECK(c.segments[i].back() == c.segments[(i + 1) % 8].front());
    }
    CHECK(c.loop().size() == 8 * 31);
    CHECK(contour_is_simple(c));
}

TEST_CASE("square anchors enclose their center") {
    std::vector<Point2> a{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    auto c = close_contour(a, 16);
    CHECK(testing::pnpoly(c.loop(), 2, 2));
}

TEST_CASE("contour translation equivariance") {
    auto a = initial_anchors({30, 30}, 10, 8);
    auto b = a;
    for (auto& p : b) p = p + Point2{3, -2};
    auto ca = close_contour(a, 16).loop();
    auto cb = close_contour(b, 16).loop();
    REQUIRE(ca.size() == cb.size());
    for (std::size_t i = 0; i < ca.size(); ++i) {
        CHECK(cb[i].x - ca[i].x == doctest::Approx(3).epsilon(1e-9));
        CHECK(cb[i].y - ca[i].y == doctest::Approx(-2).epsilon(1e-9));
    }
    // integer shift of anchors shifts the mask
    auto ma = rasterize(close_contour(a, 16), 64, 64);
    auto mb = rasterize(close_contour(b, 16), 64, 64);
    CHECK(ma.area() == mb.area());
    for (int r = 0; r < 64; ++r)
        for (int col = 0; col < 64; ++col)
            if (ma.get(r, col) && mb.in_frame(r - 2, col + 3)) CHECK(mb.get(r - 2, col + 3));
}

TEST_CASE("rasterize axis-aligned square") {
    auto m = rasterize_polygon(std::vector<Point2>{{2, 2}, {6, 2}, {6, 6}, {2, 6}}, 10, 10);
    CHECK(m.area() == 16);
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c) CHECK(m.get(r, c) == (r >= 2 && r < 6 && c >= 2 && c < 6));
}

TEST_CASE("rasterize clips out-of-frame contours") {
    auto m = rasterize_polygon(std::vector<Point2>{{-20, -20}, {-10, -20}, {-10, -10}}, 16, 16);
    CHECK(m.area() == 0);
    auto partial = rasterize_polygon(std::vector<Point2>{{-5, -5}, {5, -5}, {5, 5}, {-5, 5}}, 16, 16);
    CHECK(partial.area() == 25);
}

TEST_CASE("rasterize initial circle area") {
    auto c = close_contour(initial_anchors({64, 64}, 20, 16), 64);
    auto m = rasterize(c, 128, 128);
    double disc = std::numbers::pi * 400;
    CHECK(std::abs(m.area() - disc) / disc < 0.05);
}

TEST_CASE("rasterize matches per-cell ray casting on random contours") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 60; ++t) {
        int n = 4 + t % 9;
        auto a = testing::random_star(rng, 24 + t % 7, 20 + t % 5, 3, 22, n);
        ClosedContour c;
        try {
            c = close_contour(a, 12);
        } catch (const GeometryError&) {
            continue;
        }
        auto loop = c.loop();
        CHECK(rasterize(c, 48, 40) == testing::pnpoly_mask(loop, 48, 40));
        CHECK(reference::rasterize_serial(c, 48, 40) == rasterize(c, 48, 40));
    }
}

TEST_CASE("rasterize handles vertices on cell-center rows") {
    // vertices exactly at y = k + 0.5 exercise the half-open rule
    std::vector<Point2> poly{{1.5, 1.5}, {8.5, 1.5}, {5.0, 4.5}, {8.5, 7.5}, {1.5, 7.5}, {4.0, 4.5}};
    CHECK(rasterize_polygon(poly, 10, 10) == testing::pnpoly_mask(poly, 10, 10));
}

TEST_CASE("simplicity checks") {
    std::vector<Point2> bowtie{{0, 0}, {4, 4}, {4, 0}, {0, 4}};
    CHECK_FALSE(polygon_is_simple(bowtie));
    std::vector<Point2> sq{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    CHECK(polygon_is_simple(sq));
    CHECK(polygon_area(sq) == doctest::Approx(16));
    CHECK(contour_is_simple(ClosedContour::from_polygon(sq)));
    CHECK_FALSE(contour_is_simple(ClosedContour::from_polygon(bowtie)));
}

TEST_CASE("random feasible genomes give simple contours") {
    auto region = boundary::build_region({50, 50}, 16, 0.3, 8, Box{0, 0, 100, 100}, 0.8);
    std::mt19937_64 rng(5);
    int tested = 0;
    for (int t = 0; t < 300; ++t) {
        std::vector<Point2> a;
        for (int j = 0; j < 8; ++j) {
            Box b = region.anchor_bounds(j);
            std::uniform_real_distribution<double> ux(b.x1, b.x2), uy(b.y1, b.y2);
            Point2 p;
            do p = {ux(rng), uy(rng)};
            while (!boundary::feasible(region, j, p).rho());
            a.push_back(p);
        }
        CHECK(contour_is_simple(close_contour(a, 32)));
        ++tested;
    }
    CHECK(tested == 300);
}

TEST_CASE("polygon export") {
    auto c = ClosedContour::from_polygon({{0, 0}, {1, 0}, {1, 1}});
    std::ostringstream os;
    write_polygon_text(os, c);
    CHECK(os.str() == "0 0\n1 0\n1 1\n");
}

}
