#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace catmmv {

// Base class for all failures raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// One violated parameter constraint, e.g. {"sigma0", "> 0"}.
struct Violation {
    std::string field;
    std::string constraint;
};

// Raised by parameter validation; carries every violated constraint.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(format(violations)), violations_(std::move(violations)) {}

    ValidationError(std::string field, std::string constraint)
        : ValidationError(std::vector<Violation>{{std::move(field), std::move(constraint)}}) {}

    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string format(const std::vector<Violation>& vs) {
        std::string msg = "invalid parameters:";
        for (const auto& v : vs) msg += " [" + v.field + " " + v.constraint + "]";
        return msg;
    }
    std::vector<Violation> violations_;
};

// Adaptive quadrature did not reach the requested tolerance.
class QuadratureFailure : public Error {
public:
    explicit QuadratureFailure(const std::string& msg) : Error("quadrature failure: " + msg) {}
};

// A model hypothesis needed for a closed form does not hold (e.g. negative discriminant).
class ConditionViolated : public Error {
public:
    explicit ConditionViolated(const std::string& msg) : Error("condition violated: " + msg) {}
};

// The requested window collapses to a point where a formula is 0/0.
class DegenerateWindow : public Error {
public:
    explicit DegenerateWindow(const std::string& msg) : Error("degenerate window: " + msg) {}
};

// A simulated state left the finite range.
class NonFiniteState : public Error {
public:
    NonFiniteState(std::size_t path_index, double time)
        : Error("non-finite state on path " + std::to_string(path_index) + " at t=" +
                std::to_string(time)),
          path_index(path_index),
          time(time) {}

    std::size_t path_index;
    double time;
};

}  // namespace catmmv
