#pragma once

#include <stdexcept>
#include <string>

namespace hamiltonia {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define HAMILTONIA_DEFINE_ERROR(Name)                      \
    struct Name : Error {                                  \
        using Error::Error;                                \
    }

HAMILTONIA_DEFINE_ERROR(PreconditionViolated);
HAMILTONIA_DEFINE_ERROR(DiophantineViolation);
HAMILTONIA_DEFINE_ERROR(TruncationExceeded);
HAMILTONIA_DEFINE_ERROR(OrderTooLarge);
HAMILTONIA_DEFINE_ERROR(ZeroCurrentLine);
HAMILTONIA_DEFINE_ERROR(NoConvergence);
HAMILTONIA_DEFINE_ERROR(TurningPointDegenerate);
HAMILTONIA_DEFINE_ERROR(NotPositiveDefinite);
HAMILTONIA_DEFINE_ERROR(CollisionDetected);
HAMILTONIA_DEFINE_ERROR(TailNotDecaying);
HAMILTONIA_DEFINE_ERROR(JacobianSingular);
HAMILTONIA_DEFINE_ERROR(ImplicitSolveFailed);
HAMILTONIA_DEFINE_ERROR(DomainViolation);
HAMILTONIA_DEFINE_ERROR(ChartSingular);
HAMILTONIA_DEFINE_ERROR(ForbiddenRegion);
HAMILTONIA_DEFINE_ERROR(FitIllConditioned);
HAMILTONIA_DEFINE_ERROR(ZeroMeanObstruction);
HAMILTONIA_DEFINE_ERROR(ResonantDenominator);
HAMILTONIA_DEFINE_ERROR(DegenerateHessian);
HAMILTONIA_DEFINE_ERROR(StationarityViolated);
HAMILTONIA_DEFINE_ERROR(BudgetExceeded);
HAMILTONIA_DEFINE_ERROR(ResummationDiverges);
HAMILTONIA_DEFINE_ERROR(NotClosed);
HAMILTONIA_DEFINE_ERROR(FrequencyMismatch);

#undef HAMILTONIA_DEFINE_ERROR

}  // namespace hamiltonia
