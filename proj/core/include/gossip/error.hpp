#pragma once

#include <stdexcept>
#include <string>

namespace gossip {

// Malformed or mutually inconsistent inputs (bad edges, non-stochastic rows,
// mismatched dimensions, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Bayes update received a signal with zero likelihood under every state
// that still carries mass.
class ImpossibleSignalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The chain has more than one recurrent class, so pi is not unique.
class NonUniqueStationaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gossip
