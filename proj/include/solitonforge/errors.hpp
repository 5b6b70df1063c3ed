#pragma once

#include <stdexcept>
#include <string>

namespace solitonforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define SOLITONFORGE_ERROR(Name)                                   \
  struct Name : Error {                                            \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

SOLITONFORGE_ERROR(DegenerateSpan);
SOLITONFORGE_ERROR(SingularMatrix);
SOLITONFORGE_ERROR(EvaluationFailure);
SOLITONFORGE_ERROR(PoleHit);
SOLITONFORGE_ERROR(PoleCollision);
SOLITONFORGE_ERROR(OffGroupInput);
SOLITONFORGE_ERROR(ShapeMismatch);
SOLITONFORGE_ERROR(NormalizationError);
SOLITONFORGE_ERROR(ClassMismatch);
SOLITONFORGE_ERROR(PeriodViolation);
SOLITONFORGE_ERROR(NotASoliton);
SOLITONFORGE_ERROR(BadCauchySlice);
SOLITONFORGE_ERROR(SingularSlice);
SOLITONFORGE_ERROR(CFLViolation);
SOLITONFORGE_ERROR(PreconditionViolation);

#undef SOLITONFORGE_ERROR

// Raised where the SL(2,R) dressing data V1, V2 stop being transversal.
struct Singular : Error {
  Singular(double xi, double eta)
      : Error("Singular: dressing data degenerate at xi=" + std::to_string(xi) +
              " eta=" + std::to_string(eta)),
        xi(xi), eta(eta) {}
  double xi, eta;
};

struct BlowupDetected : Error {
  explicit BlowupDetected(double t)
      : Error("BlowupDetected: at t=" + std::to_string(t)), time(t) {}
  double time;
};

}  // namespace solitonforge
