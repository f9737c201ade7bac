#pragma once

#include <stdexcept>
#include <string>

namespace seeker {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// A session is already processing a turn.
class BusyError : public Error {
 public:
  using Error::Error;
};

/// The decoder could not produce any output satisfying the DecodingSpec.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Failure reported by (or while talking to) a generation backend.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, std::string request_id = {})
      : Error(what), request_id_(std::move(request_id)) {}
  const std::string& request_id() const noexcept { return request_id_; }

 private:
  std::string request_id_;
};

/// The backend answered, but the payload does not follow the wire format.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The backend does not offer the requested capability (e.g. scoring).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A search provider could not be reached or returned garbage.
class RetrievalError : public Error {
 public:
  RetrievalError(const std::string& provider, const std::string& what)
      : Error(provider + ": " + what), provider_(provider) {}
  const std::string& provider() const noexcept { return provider_; }

 private:
  std::string provider_;
};

/// Any failure inside a pipeline stage, labelled with the stage name
/// ("search", "retrieve", "knowledge", "response").
class StageError : public Error {
 public:
  enum class Cause { Backend, Constraint, Retrieval, Other };

  StageError(std::string stage, Cause cause, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)), cause_(cause) {}

  const std::string& stage() const noexcept { return stage_; }
  Cause cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  Cause cause_;
};

}  // namespace seeker
