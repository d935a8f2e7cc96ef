#pragma once

#include <stdexcept>
#include <string>

namespace mdlp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The conditioning prefix has probability zero under the measure.
struct UndefinedConditional : Error {
  using Error::Error;
};

struct InvalidSpec : Error {
  InvalidSpec(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Every enumerated model assigns probability zero to the data.
struct AllExcluded : Error {
  using Error::Error;
};

struct CutoffExhausted : Error {
  using Error::Error;
};

struct NotDeterministic : Error {
  using Error::Error;
};

// Exact enumeration would exceed the configured budget; use the Monte-Carlo estimator.
struct BudgetExceeded : Error {
  using Error::Error;
};

struct ConfigError : Error {
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct MissingColumn : Error {
  using Error::Error;
};

}  // namespace mdlp
