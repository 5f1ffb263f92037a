#pragma once

#include <stdexcept>
#include <string>

namespace cascadelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration (infeasible calibration, invalid pricing, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or invariant-violating data (trace files, CSVs, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

// A charge would push spend past the budget; the ledger stays unchanged.
class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

// Replay-only trace asked for a record it does not hold.
class TraceExhaustedError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascadelab
