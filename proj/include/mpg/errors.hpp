#pragma once

#include <stdexcept>

namespace mpg {

/// Base class of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateQuaternion : public Error { public: using Error::Error; };
class NonUnitAxis : public Error { public: using Error::Error; };
class NonUnitRotationPart : public Error { public: using Error::Error; };
class NonUnitTangentPoint : public Error { public: using Error::Error; };
class NearOrthogonalRotation : public Error { public: using Error::Error; };
class ChartsTooFarApart : public Error { public: using Error::Error; };
class NotPositiveDefinite : public Error { public: using Error::Error; };
class NonSymmetric : public Error { public: using Error::Error; };
class NoCompatiblePairs : public Error { public: using Error::Error; };
class AllComponentsDropped : public Error { public: using Error::Error; };
class TargetUnreachable : public Error { public: using Error::Error; };
class TooFewSamples : public Error { public: using Error::Error; };
class OrphanSample : public Error { public: using Error::Error; };

}  // namespace mpg
