#pragma once

#include <stdexcept>
#include <string>

namespace polybounds {

// Every failure carries a short machine-readable category so the CLI can
// report it without parsing the message text.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

#define POLYBOUNDS_ERROR(Name)                                              \
    struct Name : Error {                                                   \
        explicit Name(const std::string& what) : Error(#Name, what) {}      \
    }

POLYBOUNDS_ERROR(InvalidTensor);
POLYBOUNDS_ERROR(SingularOnSymmetric);
POLYBOUNDS_ERROR(NormalizationFailure);
POLYBOUNDS_ERROR(DegenerateLine);
POLYBOUNDS_ERROR(NotInOmega);
POLYBOUNDS_ERROR(NoRoot);
POLYBOUNDS_ERROR(BranchAmbiguity);
POLYBOUNDS_ERROR(PoleAtTheta);
POLYBOUNDS_ERROR(InadmissibleZI);
POLYBOUNDS_ERROR(UndersampledTrajectory);
POLYBOUNDS_ERROR(NoRealGamma);
POLYBOUNDS_ERROR(OutsideUnitDisk);
POLYBOUNDS_ERROR(NotAttainedWithinSearch);
POLYBOUNDS_ERROR(SingularInterfaceSystem);
POLYBOUNDS_ERROR(NoConvergence);
POLYBOUNDS_ERROR(LostPositivity);
POLYBOUNDS_ERROR(ConfigError);
POLYBOUNDS_ERROR(IOError);

#undef POLYBOUNDS_ERROR

} // namespace polybounds
