#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace lsvqc {

enum class ErrorKind { precondition, config, stall, cap };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what, ErrorKind kind = ErrorKind::precondition) {
  throw Error(kind, what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(what);
}

namespace detail {
inline int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  long x = std::strtol(v, &end, 10);
  if (end == v || x <= 0) return fallback;
  return static_cast<int>(x);
}
}  // namespace detail

// Largest register for which full 2^n x 2^n matrices may be built.
inline int dense_cap() { return detail::env_int("LSVQC_DENSE_CAP", 12); }
// Largest register for statevector simulation.
inline int state_cap() { return detail::env_int("LSVQC_STATE_CAP", 22); }
// Largest symmetry-sector block that is diagonalized densely.
inline int sector_cap() { return detail::env_int("LSVQC_SECTOR_CAP", 6000); }

inline void check_dense_cap(int n) {
  if (n > dense_cap())
    throw Error(ErrorKind::cap, "dense matrix on " + std::to_string(n) + " qubits exceeds cap " +
                                    std::to_string(dense_cap()) + " (set LSVQC_DENSE_CAP)");
}

inline void check_state_cap(int n) {
  if (n > state_cap())
    throw Error(ErrorKind::cap, "statevector on " + std::to_string(n) + " qubits exceeds cap " +
                                    std::to_string(state_cap()) + " (set LSVQC_STATE_CAP)");
}

}  // namespace lsvqc
