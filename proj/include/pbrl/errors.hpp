#pragma once

#include <stdexcept>
#include <string>

namespace pbrl {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/width mismatch between data and a network or environment contract.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Operation applied in a state that does not admit it (step after done,
// backward with a stale trace, ...).
class InvalidStateError : public Error {
public:
  explicit InvalidStateError(const std::string& msg) : Error(msg) {}
};

// A loss was asked to average over an empty batch.
class EmptyBatchError : public Error {
public:
  explicit EmptyBatchError(const std::string& msg) : Error(msg) {}
};

// NaN/inf encountered where training cannot continue.
class NonFiniteError : public Error {
public:
  explicit NonFiniteError(const std::string& msg) : Error(msg) {}
};

// Query queue is at capacity; the producer should retry later.
class QueueFullError : public Error {
public:
  explicit QueueFullError(const std::string& msg) : Error(msg) {}
};

// Feedback budget exhausted; no further labels are accepted.
class BudgetExhaustedError : public Error {
public:
  explicit BudgetExhaustedError(const std::string& msg) : Error(msg) {}
};

// A record was labeled twice, or an unknown id was referenced.
class IdempotencyError : public Error {
public:
  explicit IdempotencyError(const std::string& msg) : Error(msg) {}
};

class UnknownIdError : public Error {
public:
  explicit UnknownIdError(const std::string& msg) : Error(msg) {}
};

// Malformed configuration file or flag value.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace pbrl
