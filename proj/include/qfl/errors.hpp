/**
 * @file errors.hpp
 * @brief Exception types raised by the library.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qfl {

/// Base class; `kind()` is a stable machine-readable tag used by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define QFL_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(tag, what) {}      \
  };

QFL_DEFINE_ERROR(SolverFailure, "solver_failure")
QFL_DEFINE_ERROR(DomainError, "domain_error")
QFL_DEFINE_ERROR(PositivityError, "positivity_error")
QFL_DEFINE_ERROR(OutOfChart, "out_of_chart")
QFL_DEFINE_ERROR(Inconclusive, "inconclusive")
QFL_DEFINE_ERROR(NotIntegrable, "not_integrable")
QFL_DEFINE_ERROR(SingularMetric, "singular_metric")
QFL_DEFINE_ERROR(AccuracyError, "accuracy_error")
QFL_DEFINE_ERROR(StepperError, "stepper_error")
QFL_DEFINE_ERROR(NoRoom, "no_room")

#undef QFL_DEFINE_ERROR

/// Invalid configuration; `key()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config_error", key + ": " + what), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace qfl
