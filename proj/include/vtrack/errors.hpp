#pragma once

#include <stdexcept>
#include <string>

namespace vtrack {

/// Base of every error raised by the library. `code()` is a short stable tag
/// used by the CLI for machine-readable diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define VTRACK_DEFINE_ERROR(Name, tag)                                \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(tag, what) {}      \
  }

VTRACK_DEFINE_ERROR(DegenerateInput, "degenerate_input");
VTRACK_DEFINE_ERROR(UndefinedDistance, "undefined_distance");
VTRACK_DEFINE_ERROR(NoCluster, "no_cluster");
VTRACK_DEFINE_ERROR(SingularGate, "singular_gate");
VTRACK_DEFINE_ERROR(SingularInnovation, "singular_innovation");
VTRACK_DEFINE_ERROR(InvalidSpec, "invalid_spec");
VTRACK_DEFINE_ERROR(AlignmentError, "alignment");
VTRACK_DEFINE_ERROR(ParseError, "parse");
VTRACK_DEFINE_ERROR(IoError, "io");

#undef VTRACK_DEFINE_ERROR

/// Configuration problem tied to a specific key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config", "key '" + key + "': " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace vtrack
