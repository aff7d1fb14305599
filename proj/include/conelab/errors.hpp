#pragma once

#include <stdexcept>
#include <string>

namespace conelab {

/// Base class for every domain failure raised by the library. `name()` is the
/// stable identifier printed by the CLI (e.g. "NotStrictlyStable").
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define CONELAB_DEFINE_ERROR(Type)                                            \
    class Type : public Error {                                               \
    public:                                                                   \
        explicit Type(const std::string& what) : Error(#Type, what) {}        \
    }

CONELAB_DEFINE_ERROR(InvalidArgument);
CONELAB_DEFINE_ERROR(NotStrictlyStable);
CONELAB_DEFINE_ERROR(IntegrationDiverged);
CONELAB_DEFINE_ERROR(SideViolation);
CONELAB_DEFINE_ERROR(InsufficientTail);
CONELAB_DEFINE_ERROR(OutOfDomain);
CONELAB_DEFINE_ERROR(GraphFailure);
CONELAB_DEFINE_ERROR(QuadratureFailure);
CONELAB_DEFINE_ERROR(UnsupportedDimension);
CONELAB_DEFINE_ERROR(UnknownMode);
CONELAB_DEFINE_ERROR(DegenerateMetric);
CONELAB_DEFINE_ERROR(StepUnderflow);
CONELAB_DEFINE_ERROR(EmptyIntersection);
CONELAB_DEFINE_ERROR(PreconditionViolated);
CONELAB_DEFINE_ERROR(InsufficientScales);

#undef CONELAB_DEFINE_ERROR

} // namespace conelab
