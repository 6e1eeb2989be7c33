#pragma once

#include <stdexcept>
#include <string>

namespace tubeflock {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Two particles at the same point; the |x|^-b core is undefined there.
class SingularConfiguration : public Error {
 public:
  using Error::Error;
};

// Position on or outside the tube wall.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class InvalidCellWidth : public Error {
 public:
  using Error::Error;
};

// Step size underflow in the adaptive integrator.
class StiffnessFailure : public Error {
 public:
  StiffnessFailure(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class MembershipError : public Error {
 public:
  using Error::Error;
};

class UndefinedRatio : public Error {
 public:
  using Error::Error;
};

class HorizonTooLarge : public Error {
 public:
  using Error::Error;
};

class InfeasibleDensity : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tubeflock
