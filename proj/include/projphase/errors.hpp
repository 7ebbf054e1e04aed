#pragma once

#include <stdexcept>
#include <string>

namespace projphase {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller passed arguments outside the documented domain.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(what) {}
};

// A value that must be nonzero was (numerically) zero.
class ZeroVector : public InvalidInput {
 public:
  explicit ZeroVector(const std::string& what) : InvalidInput(what) {}
};

// Requested projection rank outside [1, M-1].
class InvalidRank : public InvalidInput {
 public:
  explicit InvalidRank(const std::string& what) : InvalidInput(what) {}
};

// Operands whose dimensions do not agree.
class DimensionMismatch : public InvalidInput {
 public:
  explicit DimensionMismatch(const std::string& what) : InvalidInput(what) {}
};

// Random draws stayed rank deficient through the retry budget.
class DegenerateSample : public Error {
 public:
  explicit DegenerateSample(const std::string& what) : Error(what) {}
};

// A matrix that must be a valid orthogonal projection is not, or a
// deserialized object violates a structural invariant.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(what) {}
};

// Basis columns were rank deficient where full column rank is required.
class RankDeficientBasis : public InvalidInput {
 public:
  explicit RankDeficientBasis(const std::string& what) : InvalidInput(what) {}
};

// An operation restricted to rank-one projections saw a higher rank.
class NonRankOne : public InvalidInput {
 public:
  explicit NonRankOne(const std::string& what) : InvalidInput(what) {}
};

// A requested computation would exceed an explicit resource cap.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what) : Error(what) {}
};

// Partition enumeration would require more subsets than the configured cap.
class PartitionCapExceeded : public BudgetExceeded {
 public:
  explicit PartitionCapExceeded(const std::string& what) : BudgetExceeded(what) {}
};

// JSON input does not match the expected schema. `path` is a JSON-pointer
// style location of the offending node.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Witness vectors collapsed so that no collision pair can be formed.
class DegenerateWitness : public Error {
 public:
  explicit DegenerateWitness(const std::string& what) : Error(what) {}
};

// The stacked linear system for a closed-form witness was numerically
// unsolvable. Guard only; valid inputs always admit a kernel vector.
class DegenerateSystem : public Error {
 public:
  explicit DegenerateSystem(const std::string& what) : Error(what) {}
};

// Rejection sampling failed to hit a full-spark configuration in time.
class FullSparkSamplingFailed : public Error {
 public:
  explicit FullSparkSamplingFailed(const std::string& what) : Error(what) {}
};

}  // namespace projphase
