#pragma once

#include <stdexcept>
#include <string>

namespace sgd {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorCategory {
    Rejected,  // invalid input: grid, parameters, physics preconditions, config
    Numeric,   // runtime numerical failure: blow-up, non-convergence, no growth
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& message)
        : std::runtime_error(message), category_(category), kind_(std::move(kind)) {}

    ErrorCategory category() const noexcept { return category_; }
    /// Short machine-readable tag, e.g. "invalid_grid".
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

#define SGD_DEFINE_ERROR(Name, Category, Tag)                                  \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& message)                              \
            : Error(ErrorCategory::Category, Tag, message) {}                  \
    }

SGD_DEFINE_ERROR(InvalidGrid, Rejected, "invalid_grid");
SGD_DEFINE_ERROR(GridMismatch, Rejected, "grid_mismatch");
SGD_DEFINE_ERROR(InvalidArgument, Rejected, "invalid_argument");
SGD_DEFINE_ERROR(UndefinedCoupling, Rejected, "undefined_coupling");
SGD_DEFINE_ERROR(NoH1Wave, Rejected, "no_h1_wave");
SGD_DEFINE_ERROR(SuperluminalSpeed, Rejected, "superluminal_speed");
SGD_DEFINE_ERROR(UnresolvedMollifier, Rejected, "unresolved_mollifier");
SGD_DEFINE_ERROR(CflViolation, Rejected, "cfl_violation");
SGD_DEFINE_ERROR(LightConeExit, Rejected, "light_cone_exit");
SGD_DEFINE_ERROR(ConfigError, Rejected, "config_error");
SGD_DEFINE_ERROR(NonConvergence, Numeric, "non_convergence");
SGD_DEFINE_ERROR(NoGrowthDetected, Numeric, "no_growth_detected");

#undef SGD_DEFINE_ERROR

/// Non-finite or runaway state during time stepping.
class BlowUp : public Error {
public:
    BlowUp(double time, const std::string& message)
        : Error(ErrorCategory::Numeric, "blow_up", message), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace sgd
