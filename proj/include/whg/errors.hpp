#pragma once

#include <stdexcept>
#include <string>

namespace whg {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroInverse : Error {
  explicit ZeroInverse(const std::string& msg = "inverse of zero residue") : Error(msg) {}
};

struct ParamsMismatch : Error {
  explicit ParamsMismatch(const std::string& msg = "group parameters mismatch") : Error(msg) {}
};

struct EvenCharacteristic : Error {
  explicit EvenCharacteristic(const std::string& msg = "operation requires odd p") : Error(msg) {}
};

struct NotIsotropic : Error {
  explicit NotIsotropic(const std::string& msg = "subspace is not isotropic") : Error(msg) {}
};

struct ZeroAlpha : Error {
  explicit ZeroAlpha(const std::string& msg = "alpha must be nonzero") : Error(msg) {}
};

struct ZeroLabel : Error {
  explicit ZeroLabel(const std::string& msg = "irrep label k must be nonzero") : Error(msg) {}
};

struct TooLarge : Error {
  explicit TooLarge(const std::string& msg = "instance exceeds dense backend cap") : Error(msg) {}
};

struct InsufficientSamples : Error {
  explicit InsufficientSamples(const std::string& msg = "need at least two round samples") : Error(msg) {}
};

struct SampleBudgetExceeded : Error {
  explicit SampleBudgetExceeded(const std::string& msg = "sampling budget exceeded") : Error(msg) {}
};

struct VerificationFailed : Error {
  explicit VerificationFailed(const std::string& msg = "recovered subgroup inconsistent with oracle") : Error(msg) {}
};

struct ConfigInvalid : Error {
  explicit ConfigInvalid(const std::string& msg = "invalid experiment configuration") : Error(msg) {}
};

struct BackendCapExceeded : Error {
  explicit BackendCapExceeded(const std::string& msg = "backend size cap exceeded") : Error(msg) {}
};

}  // namespace whg
