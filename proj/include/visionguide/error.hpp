#pragma once

#include <stdexcept>
#include <string>

namespace visionguide {

/// Base for every recoverable input/configuration failure raised by the library.
/// Command-line front ends map these to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a library invariant is found broken at run time (exit status 2).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

#define VISIONGUIDE_DEFINE_ERROR(Name)          \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    };

VISIONGUIDE_DEFINE_ERROR(InvalidArgument)
VISIONGUIDE_DEFINE_ERROR(WindowLargerThanImage)
VISIONGUIDE_DEFINE_ERROR(WindowTooSmall)
VISIONGUIDE_DEFINE_ERROR(FeatureLengthMismatch)
VISIONGUIDE_DEFINE_ERROR(DegenerateTrainingSet)
VISIONGUIDE_DEFINE_ERROR(DimensionMismatch)
VISIONGUIDE_DEFINE_ERROR(MissingAnnotation)
VISIONGUIDE_DEFINE_ERROR(MalformedJson)
VISIONGUIDE_DEFINE_ERROR(InvariantViolation)
VISIONGUIDE_DEFINE_ERROR(PlacementInfeasible)
VISIONGUIDE_DEFINE_ERROR(ModelFormatError)
VISIONGUIDE_DEFINE_ERROR(ImageIoError)
VISIONGUIDE_DEFINE_ERROR(ConfigError)

#undef VISIONGUIDE_DEFINE_ERROR

}  // namespace visionguide
