#pragma once

#include <stdexcept>
#include <string>

namespace edgebench {

// Bad input: malformed plan, config, query, table row. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Marker stream violated the grammar or the phase order.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A phase is missing its START or END event.
class IncompletePhaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough telemetry in a window to compute the requested statistic.
class InsufficientSamplesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoBaselineError : public InsufficientSamplesError {
 public:
  using InsufficientSamplesError::InsufficientSamplesError;
};

// Metric requested on a dataset that does not carry it.
class MissingMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Telemetry backend could not start or stalled mid-run.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edgebench
