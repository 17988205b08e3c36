#ifndef SEN_ERRORS_HPP
#define SEN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sen {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Network construction and file loading.
class ParseError : public Error {
 public:
  using Error::Error;
};
class DuplicateEvent : public Error {
 public:
  using Error::Error;
};
class CausalityViolation : public Error {
 public:
  using Error::Error;
};
class EventTimeMismatch : public Error {
 public:
  using Error::Error;
};

// Splitting and negative sampling.
class InsufficientRemovableEdges : public Error {
 public:
  using Error::Error;
};
class NotEnoughNegatives : public Error {
 public:
  using Error::Error;
};

// Impact densities and model evaluation.
class InvalidParams : public Error {
 public:
  using Error::Error;
};
class EmptySample : public Error {
 public:
  using Error::Error;
};
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Evaluation metrics.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};
class InsufficientTruth : public Error {
 public:
  using Error::Error;
};

// Data ingestion.
class IngestError : public Error {
 public:
  using Error::Error;
};
class EmptyNetwork : public Error {
 public:
  using Error::Error;
};

}  // namespace sen

#endif  // SEN_ERRORS_HPP
