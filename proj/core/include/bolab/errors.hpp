#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bolab {

/// Process exit codes used by the `bolab` CLI.
enum class ExitCode : int {
    ok = 0,
    config = 2,
    instability = 3,
    contamination = 4,
    gate_failure = 5,
};

/// Base class for run-level failures that map onto an exit code.
class RunError : public std::runtime_error {
public:
    RunError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ConfigError : public RunError {
public:
    explicit ConfigError(const std::string& what) : RunError(ExitCode::config, what) {}
};

/// Non-finite values appeared during time stepping.
class InstabilityError : public RunError {
public:
    InstabilityError(std::size_t step, const std::string& what)
        : RunError(ExitCode::instability, what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The field reached the periodic boundary above the allowed ratio.
class ContaminationError : public RunError {
public:
    ContaminationError(double ratio, const std::string& what)
        : RunError(ExitCode::contamination, what), ratio_(ratio) {}
    double ratio() const noexcept { return ratio_; }

private:
    double ratio_;
};

/// A trajectory does not cover the time span an analysis needs.
class SpanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bolab
