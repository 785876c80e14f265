#pragma once

#include <stdexcept>
#include <string>

namespace seqdesign {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated (bad index, shape mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A mathematical quantity is undefined for the given input.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (FASTA, PDB, CSV, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Scorer failures. Subclasses distinguish the cause for remote scorers.
class ScorerError : public Error {
 public:
  using Error::Error;
};

class ScorerTimeout : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class ProtocolError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class MalformedResponse : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class ScoreOutOfRange : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

/// Training produced a non-finite loss.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqdesign
