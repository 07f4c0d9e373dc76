#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace elicit {

// Base of every engine error. code() is the stable machine-readable tag the
// service and CLI report; one code per error class.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Argument outside the mathematical domain of a function (alpha not in (0,1),
// theta >= 0.5, value outside a transform's support, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain-error", message) {}
};

// A judgement set that violates its own invariants (ordering, bounds).
class InvalidJudgement : public Error {
 public:
  explicit InvalidJudgement(const std::string& message)
      : Error("invalid-judgement", message) {}
};

// Optimizer gave up. Carries the best point seen so the caller can still
// show the expert something.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& message, double p1, double p2, double residual)
      : Error("fit-failure", message), best_{p1, p2}, residual_(residual) {}

  std::pair<double, double> best_params() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  std::pair<double, double> best_;
  double residual_;
};

// Workflow operation called from a state that does not allow it.
class StateError : public Error {
 public:
  explicit StateError(const std::string& message) : Error("state-error", message) {}
};

// Malformed document. location is a byte offset or a JSON pointer.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string location)
      : Error("parse-error", message + " (at " + location + ")"),
        location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

// Well-formed document that breaks a session invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string invariant, const std::string& message)
      : Error("validation-error", "invariant violated [" + invariant + "]: " + message),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

class InvalidTransform : public Error {
 public:
  explicit InvalidTransform(std::string_view tag)
      : Error("invalid-transform", "unknown transform '" + std::string(tag) +
                                       "' (expected identity, log or logit)") {}
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& message) : Error("invalid-config", message) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message) : Error("not-found", message) {}
};

namespace detail {

inline void require_domain(bool ok, const char* message) {
  if (!ok) throw DomainError(message);
}

}  // namespace detail

}  // namespace elicit
