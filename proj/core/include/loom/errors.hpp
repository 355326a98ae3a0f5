#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace loom {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  using Error::Error;
};

// Structurally invalid plan/segment payload. `units` lists the offending
// unit indices when the problem is unit-shaped (missing, duplicate, out of
// range).
struct SchemaError : Error {
  std::vector<int> units;
  explicit SchemaError(const std::string& what, std::vector<int> offending = {})
      : Error(what), units(std::move(offending)) {}
};

struct UnitMissing : Error {
  int unit = 0;
  explicit UnitMissing(const std::string& what, int u) : Error(what), unit(u) {}
};

struct EmptyInput : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct BackendError : Error {
  using Error::Error;
};

struct JudgeError : Error {
  using Error::Error;
};

struct ScorerError : Error {
  using Error::Error;
};

struct NonFiniteLogProb : Error {
  using Error::Error;
};

struct HttpError : Error {
  int status = 0;
  std::string body_excerpt;
  HttpError(const std::string& what, int code, std::string excerpt)
      : Error(what), status(code), body_excerpt(std::move(excerpt)) {}
};

struct TimeoutError : Error {
  using Error::Error;
};

struct RetryExhausted : Error {
  using Error::Error;
};

struct GenerationExhausted : Error {
  using Error::Error;
};

struct AllCandidatesFailed : Error {
  using Error::Error;
};

struct SegmentParseExhausted : Error {
  int unit = 0;
  explicit SegmentParseExhausted(const std::string& what, int u) : Error(what), unit(u) {}
};

}  // namespace loom
