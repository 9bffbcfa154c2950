#pragma once

#include <stdexcept>
#include <string>

namespace loadwin {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ingest
struct MalformedRow : Error {
  std::size_t line;  // 1-based line number in the source file
  MalformedRow(std::size_t line_, const std::string& what)
      : Error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};
struct DuplicateTimestamp : Error {
  using Error::Error;
};
struct MissingColumn : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};

// dtw
struct EmptySequence : Error {
  using Error::Error;
};
struct BandTooNarrow : Error {
  using Error::Error;
};

// clustering
struct TooFewDays : Error {
  using Error::Error;
};
struct MixedSeriesKind : Error {
  using Error::Error;
};
struct EmptyMembers : Error {
  using Error::Error;
};

// thresholds
struct EmptyValues : Error {
  using Error::Error;
};

// report
struct InconsistentClusterIds : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace loadwin
