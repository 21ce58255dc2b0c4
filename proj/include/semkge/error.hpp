#pragma once

#include <stdexcept>
#include <string>

namespace semkge {

inline constexpr const char* kVersion = "0.1.0";

// Error categories surfaced by the library. The CLI maps `diverged` to
// exit code 3 and everything else to exit code 2.
enum class Errc {
  io,
  parse,
  out_of_range,
  invalid_argument,
  self_subclass,
  cyclic_hierarchy,
  too_many_partitions,
  empty_budget,
  degenerate_scope,
  dtype_mismatch,
  dim_mismatch,
  bad_checkpoint,
  diverged,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::out_of_range: return "out_of_range";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::self_subclass: return "self_subclass";
    case Errc::cyclic_hierarchy: return "cyclic_hierarchy";
    case Errc::too_many_partitions: return "too_many_partitions";
    case Errc::empty_budget: return "empty_budget";
    case Errc::degenerate_scope: return "degenerate_scope";
    case Errc::dtype_mismatch: return "dtype_mismatch";
    case Errc::dim_mismatch: return "dim_mismatch";
    case Errc::bad_checkpoint: return "bad_checkpoint";
    case Errc::diverged: return "diverged";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace semkge
