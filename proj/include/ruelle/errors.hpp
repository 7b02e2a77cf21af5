#pragma once

#include <stdexcept>
#include <string>

namespace ruelle {

// Base class for all library errors. `name()` is the stable machine-readable
// identifier emitted in CLI error records; `what()` carries the details.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(message), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define RUELLE_DEFINE_ERROR(Type)                                        \
    class Type : public Error {                                          \
    public:                                                              \
        explicit Type(const std::string& message)                        \
            : Error(#Type, message) {}                                   \
    }

// lattice
RUELLE_DEFINE_ERROR(NotHyperbolic);
RUELLE_DEFINE_ERROR(SingularMatrix);
RUELLE_DEFINE_ERROR(DegenerateFixedEquation);
RUELLE_DEFINE_ERROR(OverflowRisk);

// analytic_maps
RUELLE_DEFINE_ERROR(NewtonDiverged);
RUELLE_DEFINE_ERROR(CountMismatch);

// koopman
RUELLE_DEFINE_ERROR(GridTooSmall);
RUELLE_DEFINE_ERROR(AliasingSuspect);
RUELLE_DEFINE_ERROR(WeightOverflow);
RUELLE_DEFINE_ERROR(EigenNoConverge);
RUELLE_DEFINE_ERROR(PeriodTooDeep);

// perturb
RUELLE_DEFINE_ERROR(NotInGenericSet);
RUELLE_DEFINE_ERROR(DiagonalMatrix);
RUELLE_DEFINE_ERROR(DetDriftDetected);

// transfer
RUELLE_DEFINE_ERROR(EigenvalueOneNotSimple);

// configuration / schema violations (CLI exit code 2)
RUELLE_DEFINE_ERROR(ConfigError);

#undef RUELLE_DEFINE_ERROR

} // namespace ruelle
