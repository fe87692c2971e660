#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace navforge {

// Error taxonomy maps onto CLI exit codes: schema 2, domain 3, experiment 4.
enum class ErrorKind { Schema, Domain, Experiment };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void throw_schema(std::string code, const std::string& message) {
  throw Error(ErrorKind::Schema, std::move(code), message);
}

[[noreturn]] inline void throw_domain(std::string code, const std::string& message) {
  throw Error(ErrorKind::Domain, std::move(code), message);
}

[[noreturn]] inline void throw_experiment(std::string code, const std::string& message) {
  throw Error(ErrorKind::Experiment, std::move(code), message);
}

}  // namespace navforge
