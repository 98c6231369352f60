#pragma once

#include <stdexcept>
#include <string>

namespace gamma2 {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define GAMMA2_DEFINE_ERROR(Name)                                       \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  };

GAMMA2_DEFINE_ERROR(NonFiniteEvaluation)
GAMMA2_DEFINE_ERROR(StiffnessFailure)
GAMMA2_DEFINE_ERROR(NoBracket)
GAMMA2_DEFINE_ERROR(KinkAtMass)
GAMMA2_DEFINE_ERROR(NonIntegrableTail)
GAMMA2_DEFINE_ERROR(HypothesisViolation)
GAMMA2_DEFINE_ERROR(UnsupportedSet)
GAMMA2_DEFINE_ERROR(MassOutOfRange)
GAMMA2_DEFINE_ERROR(UnresolvedEpsilon)
GAMMA2_DEFINE_ERROR(LeftLocalityBall)
GAMMA2_DEFINE_ERROR(NoConvergence)
GAMMA2_DEFINE_ERROR(RootCountChanged)
GAMMA2_DEFINE_ERROR(InvalidArgument)
GAMMA2_DEFINE_ERROR(ConfigError)

#undef GAMMA2_DEFINE_ERROR

}  // namespace gamma2
