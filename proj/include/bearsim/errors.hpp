#pragma once

#include <stdexcept>
#include <string>

namespace bearsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NonUnitBearing : public Error {
public:
  using Error::Error;
};

class MissingBearing : public Error {
public:
  using Error::Error;
};

class NotLocalizable : public Error {
public:
  using Error::Error;
};

class NotHurwitz : public Error {
public:
  using Error::Error;
};

class NotDetectable : public Error {
public:
  using Error::Error;
};

class NoConvergence : public Error {
public:
  using Error::Error;
};

class NonPdInertia : public Error {
public:
  using Error::Error;
};

class NumericalBlowup : public Error {
public:
  using Error::Error;
};

class CertificateFailure : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

}  // namespace bearsim
