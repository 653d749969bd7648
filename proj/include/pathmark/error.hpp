#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pathmark {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON, XML, key encodings). `offset` is a byte
/// offset into the input when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

/// Input uses a construct outside the supported format subset.
class UnsupportedFeatureError : public Error {
 public:
  explicit UnsupportedFeatureError(const std::string& what)
      : Error("unsupported feature: " + what) {}
};

/// A function was called with arguments violating its preconditions.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Failure reported by the storage backend.
class StorageError : public Error {
 public:
  using Error::Error;
};

/// Lookup of something that does not exist (model id, model type).
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathmark
