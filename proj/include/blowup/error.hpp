#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The computed domain became too small for the requested operation.
class DomainExhausted : public Error {
 public:
  DomainExhausted() : Error("domain exhausted") {}
  explicit DomainExhausted(const std::string& what) : Error(what) {}
};

/// A point lies outside the region where the requested quantity exists.
class OutsideDomain : public Error {
 public:
  OutsideDomain() : Error("outside domain") {}
  explicit OutsideDomain(const std::string& what) : Error(what) {}
};

}  // namespace blowup
