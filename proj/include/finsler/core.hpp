#pragma once

/**
 * @file core.hpp
 * @brief Error hierarchy and the chart point type shared by every module.
 */

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was evaluated outside the domain of a sub-expression
/// (division by zero, root of a negative number, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A derivative deeper than the jet's exact order was requested.
class OrderError : public Error {
public:
    using Error::Error;
};

/// Operands live in different jet spaces (base point or order budget differ).
class SpaceMismatchError : public Error {
public:
    using Error::Error;
};

/// The fundamental tensor is singular or badly conditioned.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

/// Unknown fixture name or parameters outside the validated range.
class FixtureError : public Error {
public:
    using Error::Error;
};

/// Sampling could not produce the requested number of admissible points.
class SamplingError : public Error {
public:
    using Error::Error;
};

/// A check was invoked on an input that does not satisfy its hypothesis.
class GateRefused : public Error {
public:
    using Error::Error;
};

/// A point (x, y) of the slit tangent bundle in a local chart.
struct ChartPoint {
    std::vector<double> x;
    std::vector<double> y;

    int dim() const { return static_cast<int>(x.size()); }

    bool operator==(const ChartPoint&) const = default;
};

inline std::string to_string(const ChartPoint& p) {
    std::ostringstream os;
    os.precision(6);
    os << "x=(";
    for (std::size_t i = 0; i < p.x.size(); ++i) os << (i ? "," : "") << p.x[i];
    os << ") y=(";
    for (std::size_t i = 0; i < p.y.size(); ++i) os << (i ? "," : "") << p.y[i];
    os << ")";
    return os.str();
}

} // namespace finsler
