#pragma once

//! \file errors.hpp
//! \brief Exception types thrown by the vpid library.

#include <stdexcept>
#include <string>

namespace vpid {

//! \brief Base class of every error raised by the library
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! \brief Invalid input that violates an operation's precondition
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

//! \brief The flow direction is undefined on the hydrostatic axis
class DegenerateDirection : public Error {
  public:
    using Error::Error;
};

//! \brief Adaptive substepping could not meet the local error target
class StepRejected : public Error {
  public:
    using Error::Error;
};

//! \brief A tensor quadrature rule would exceed the node cap
class CapExceeded : public Error {
  public:
    using Error::Error;
};

//! \brief Two PCE vectors do not share germs and index set
class IndexMismatch : public Error {
  public:
    using Error::Error;
};

//! \brief Symmetric positive-definite factorization failed
class NotSPD : public Error {
  public:
    using Error::Error;
};

//! \brief Kernel density estimate requested on a zero-variance sample
class DegenerateSample : public Error {
  public:
    using Error::Error;
};

//! \brief A quadrature node mapped a parameter to a non-positive value
class NonPositiveParameter : public Error {
  public:
    using Error::Error;
};

//! \brief A forward model evaluation failed at a quadrature node
class ForwardFailure : public Error {
  public:
    ForwardFailure(std::size_t node, const std::string& what)
        : Error("forward model failed at quadrature node " + std::to_string(node) + ": " + what),
          node_(node) {}

    std::size_t node() const noexcept { return node_; }

  private:
    std::size_t node_;
};

//! \brief Malformed configuration or input file
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace vpid
