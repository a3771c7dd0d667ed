#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace xpatch {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

/// An anchor point on a patch contour, in continuous image coordinates.
using AnchorPoint = Point2;

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned rectangle [x1, x2] x [y1, y2] in pixel coordinates.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
    Point2 center() const { return {(x1 + x2) / 2, (y1 + y2) / 2}; }
    bool contains(Point2 p) const { return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2; }
    friend bool operator==(const Box&, const Box&) = default;
};

double iou(const Box& a, const Box& b);

enum class Modality { visible, infrared };

std::string to_string(Modality m);
Modality parse_modality(const std::string& s);

// Error categories; the CLI maps each to a distinct exit code.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GeometryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace xpatch
