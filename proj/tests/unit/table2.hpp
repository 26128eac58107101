#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

// Published Table II entries (t = 0.1, N_cells = 10). Index order within each
// array: Trotter average, Trotter worst, LSVQC average, LSVQC worst.
namespace table2 {

struct Row {
  const char* file;
  int qubits;
  std::array<double, 4> cnot, p2q, rz, pphys;
};

inline const std::array<Row, 5>& rows() {
  static const std::array<Row, 5> r{{
      {"tmtsf2pf6", 40, {5.1e4, 2.5e5, 1.3e4, 2.5e4}, {3.9e-5, 7.9e-6, 3.4e-4, 6.8e-5},
       {2.2e4, 1.1e5, 5.5e3, 1.1e4}, {3.4e-4, 6.8e-5, 1.4e-3, 6.8e-4}},
      {"k3c60", 60, {7.3e4, 4.4e5, 1.5e4, 4.4e4}, {2.7e-5, 4.6e-6, 1.4e-4, 4.6e-5},
       {1.3e4, 8.0e4, 2.7e3, 8.0e3}, {5.6e-4, 9.3e-5, 2.8e-3, 9.3e-4}},
      {"lafeaso", 200, {1.5e6, 1.5e7, 1.5e5, 1.5e6}, {1.3e-6, 1.3e-7, 1.3e-5, 1.3e-6},
       {4.3e5, 4.3e6, 4.3e4, 4.3e5}, {1.8e-5, 1.8e-6, 1.8e-4, 1.8e-5}},
      {"nio", 100, {3.2e6, 2.3e7, 4.5e5, 2.3e6}, {6.3e-7, 8.8e-8, 4.4e-6, 8.8e-7},
       {1.4e6, 9.7e6, 1.9e5, 9.7e5}, {5.5e-6, 7.7e-7, 3.9e-5, 7.7e-6}},
      {"srvo3", 100, {8.5e5, 6.0e6, 1.2e5, 6.0e5}, {2.4e-6, 3.3e-7, 1.7e-5, 3.3e-6},
       {2.8e5, 2.0e6, 4.0e4, 2.0e5}, {2.7e-5, 3.8e-6, 1.9e-4, 3.8e-5}},
  }};
  return r;
}

/// x printed with two significant figures equals the table entry.
inline bool same_2sf(double x, double printed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", x);
  return std::abs(std::stod(buf) - printed) <= 1e-9 * std::abs(printed);
}

}  // namespace table2
