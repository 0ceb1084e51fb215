#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfgcov {

/// Base for numerical failures raised by the PDE solvers.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what), message_(what) {}

    [[nodiscard]] const char* what() const noexcept override { return message_.c_str(); }

    /// Prefixes the message, e.g. with the scenario that was running.
    void add_context(const std::string& context) { message_ = context + ": " + message_; }

    /// Outer (receding-horizon) step at which the failure happened, if known.
    [[nodiscard]] std::optional<std::size_t> outer_step() const noexcept { return outer_step_; }
    void set_outer_step(std::size_t k) noexcept { outer_step_ = k; }

private:
    std::string message_;
    std::optional<std::size_t> outer_step_;
};

/// A value exceeded the magnitude cap or the advective CFL bound.
class Diverged : public SolverError {
public:
    Diverged(const std::string& what, std::size_t step) : SolverError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The explicit advective part of a step exceeded its CFL bound.
class CflViolation : public Diverged {
public:
    CflViolation(double cfl, double limit, std::size_t step)
        : Diverged("advective CFL " + std::to_string(cfl) + " exceeds " + std::to_string(limit), step), cfl_(cfl) {}
    [[nodiscard]] double cfl() const noexcept { return cfl_; }

private:
    double cfl_;
};

/// The density went negative by more than the flooring tolerance.
class NegativeDensity : public SolverError {
public:
    NegativeDensity(double min_value, std::size_t step)
        : SolverError("density undershoot " + std::to_string(min_value) + " at step " + std::to_string(step)),
          min_value_(min_value),
          step_(step) {}
    [[nodiscard]] double min_value() const noexcept { return min_value_; }
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    double min_value_;
    std::size_t step_;
};

/// The forward-backward fixed-point iteration hit its iteration cap.
class NotConverged : public SolverError {
public:
    explicit NotConverged(std::vector<double> residual_history)
        : SolverError("fixed-point iteration did not converge after " + std::to_string(residual_history.size()) +
                      " iterations (last residual " +
                      (residual_history.empty() ? std::string("n/a") : std::to_string(residual_history.back())) +
                      ")"),
          history_(std::move(residual_history)) {}
    [[nodiscard]] const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace mfgcov
