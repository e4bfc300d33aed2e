// SPDX-License-Identifier: Apache-2.0
//
// Shared value types and error classes for the cell-free massive MIMO simulator.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfmimo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Rectangular simulation area anchored at the origin, in metres.
struct AreaSpec {
    double width = 750.0;
    double height = 750.0;

    bool contains(const Point& p, double tol = 1e-9) const
    {
        return p.x >= -tol && p.y >= -tol && p.x <= width + tol && p.y <= height + tol;
    }

    friend bool operator==(const AreaSpec&, const AreaSpec&) = default;
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InvalidAction : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cfmimo
