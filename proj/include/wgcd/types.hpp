// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace wgcd {

using Vec2 = Eigen::Vector2d;

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Axis-aligned rectangle [x0, x0+w] x [y0, y0+h].
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double w = 1.0;
    double h = 1.0;

    [[nodiscard]] Vec2 center() const { return {x0 + 0.5 * w, y0 + 0.5 * h}; }
    [[nodiscard]] double area() const { return w * h; }
    [[nodiscard]] double diameter() const { return std::hypot(w, h); }
    [[nodiscard]] bool contains(const Vec2& p, double tol = 0.0) const
    {
        return p.x() >= x0 - tol && p.x() <= x0 + w + tol && p.y() >= y0 - tol && p.y() <= y0 + h + tol;
    }
};

inline Rect unit_square() { return Rect{0.0, 0.0, 1.0, 1.0}; }

/// Straight segment from a to b.
struct Segment {
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();

    [[nodiscard]] double length() const { return (b - a).norm(); }
    [[nodiscard]] Vec2 midpoint() const { return 0.5 * (a + b); }
    [[nodiscard]] Vec2 tangent() const { return (b - a) / length(); }
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedDegree : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace wgcd
