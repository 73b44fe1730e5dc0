#pragma once

#include <stdexcept>
#include <string>

namespace tempest {

// Root of the project error hierarchy. The three direct children map onto
// the CLI exit codes: ConfigError -> 1, DataError -> 2, NumericError -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};

// --- ingest ---------------------------------------------------------------
struct MalformedDocument : DataError {
  using DataError::DataError;
};
struct EmptyDocument : DataError {
  using DataError::DataError;
};
struct NotFound : DataError {
  using DataError::DataError;
};
struct TransportError : DataError {
  using DataError::DataError;
};
struct RateLimited : DataError {
  using DataError::DataError;
};
struct IoError : DataError {
  using DataError::DataError;
};
struct SchemaError : DataError {
  using DataError::DataError;
};
struct ValueError : DataError {
  using DataError::DataError;
};

// --- dataset ---------------------------------------------------------------
struct NoOverlap : DataError {
  using DataError::DataError;
};
struct UnknownCity : ConfigError {
  using ConfigError::ConfigError;
};
struct EmptySplit : DataError {
  using DataError::DataError;
};
struct InsufficientHistory : DataError {
  using DataError::DataError;
};

// --- preprocess -------------------------------------------------------------
struct EmptyInput : DataError {
  using DataError::DataError;
};
struct SchemaMismatch : DataError {
  using DataError::DataError;
};
struct UnfittedScaler : Error {
  using Error::Error;
};

// --- models ------------------------------------------------------------------
struct BadHyperparameter : ConfigError {
  using ConfigError::ConfigError;
};
struct DegenerateData : DataError {
  using DataError::DataError;
};
struct WidthMismatch : DataError {
  using DataError::DataError;
};
struct SingularSystem : NumericError {
  using NumericError::NumericError;
};
struct Divergence : NumericError {
  using NumericError::NumericError;
};
struct NonConvergence : NumericError {
  using NumericError::NumericError;
};

// --- eval -------------------------------------------------------------------
struct LengthMismatch : DataError {
  using DataError::DataError;
};

// --- synth ------------------------------------------------------------------
struct BadConfig : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace tempest
