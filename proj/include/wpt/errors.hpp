#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wpt {

// Raised when a circuit or scenario violates its invariants. Collects all
// offending fields so a config author sees every problem at once.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(std::vector<std::string> fields)
        : std::invalid_argument(join(fields)), fields_(std::move(fields)) {}

    const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    static std::string join(const std::vector<std::string>& fields) {
        std::string msg = "validation failed:";
        for (const auto& f : fields) {
            msg += " [" + f + "]";
        }
        return msg;
    }
    std::vector<std::string> fields_;
};

// Non-finite state produced during integration; carries the simulated time
// at which the failure was detected.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double t_fail)
        : std::runtime_error(what + " at t=" + std::to_string(t_fail)), t_fail_(t_fail) {}

    double t_fail() const noexcept { return t_fail_; }

private:
    double t_fail_;
};

// Periodic steady state was not reached within the trace.
class not_converged_error : public std::runtime_error {
public:
    not_converged_error(const std::string& what, double residual)
        : std::runtime_error(what + " (residual=" + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Scenario text could not be parsed; line is 1-based, 0 for document-level
// problems (missing sections).
class config_error : public std::runtime_error {
public:
    config_error(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace wpt
