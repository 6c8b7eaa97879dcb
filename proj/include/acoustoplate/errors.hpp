#pragma once

#include <stdexcept>
#include <string>

namespace acoustoplate {

/// Invalid grid, parameters or run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A nonlinearity violates the assumption level required by an experiment.
class AssumptionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Linear or nonlinear solver failure. Carries the last residual seen.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Diagnostics asked to fit or measure something that is not defined
/// for the supplied data (identical trajectories, empty sets, ...).
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace acoustoplate
