#pragma once

#include <stdexcept>

namespace iwfa {

// Non-square or shape-mismatched input.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parameter outside its documented domain.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A direct channel is (numerically) zero; the link payoff is constant and
// the best response is undefined.
struct DegenerateLinkError : std::domain_error {
  using std::domain_error::domain_error;
};

// A caller-supplied constant violates the precondition it was supposed to
// dominate (e.g. a projection offset below its data-dependent threshold).
struct ContractViolationError : std::logic_error {
  using std::logic_error::logic_error;
};

// Operation requires full column-rank direct channels; the channel must be
// passed through the rank-deficient reduction first.
struct PreReduceError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace iwfa
