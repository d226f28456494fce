#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "pqlab/solver.hpp"

namespace pqlab {

/// CSV with one row per non-exterior node and stored level:
/// level,t,x1..xn,value,type.
inline void write_csv(const DiscreteSolution& sol, std::ostream& os) {
  const int n = sol.lat.n;
  os << "level,t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  os << ",value,type\n";
  os.precision(17);
  for (std::size_t l = 0; l < sol.levels(); ++l) {
    for (std::size_t k = 0; k < sol.lat.size; ++k) {
      const NodeType ty = sol.types[l][k];
      if (ty == NodeType::exterior) continue;
      const Vec x = sol.lat.coords(k);
      os << l << ',' << sol.times[l];
      for (int i = 0; i < n; ++i) os << ',' << x(i);
      os << ',' << sol.values[l][k] << ',' << (ty == NodeType::interior ? "interior" : "boundary") << '\n';
    }
  }
}

/// Binary layout, host byte order:
///   char[4] "PQLB", u32 version (1), u32 n, u32 dims[n], f64 origin[n],
///   f64 h, f64 tau, u64 levels L, u64 nodes N, f64 times[L],
///   f64 values[L][N] with x1 varying fastest and NaN at exterior nodes.
struct BinarySolution {
  std::vector<std::uint32_t> dims;
  std::vector<double> origin;
  double h = 0.0;
  double tau = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
};

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw LabError(Errc::parse_error, "truncated binary solution");
  return v;
}

}  // namespace detail

inline void write_binary(const DiscreteSolution& sol, std::ostream& os) {
  os.write("PQLB", 4);
  detail::put<std::uint32_t>(os, 1);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(sol.lat.n));
  for (int d : sol.lat.dims) detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (int i = 0; i < sol.lat.n; ++i) detail::put<double>(os, sol.lat.origin(i));
  detail::put<double>(os, sol.lat.h);
  detail::put<double>(os, sol.tau);
  detail::put<std::uint64_t>(os, sol.levels());
  detail::put<std::uint64_t>(os, sol.lat.size);
  for (double t : sol.times) detail::put<double>(os, t);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t l = 0; l < sol.levels(); ++l)
    for (std::size_t k = 0; k < sol.lat.size; ++k)
      detail::put<double>(os, sol.types[l][k] == NodeType::exterior ? nan : sol.values[l][k]);
}

inline BinarySolution read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "PQLB", 4) != 0)
    throw LabError(Errc::parse_error, "not a binary solution");
  if (detail::take<std::uint32_t>(is) != 1) throw LabError(Errc::parse_error, "unsupported binary version");
  BinarySolution b;
  const auto n = detail::take<std::uint32_t>(is);
  if (n == 0 || n > 16) throw LabError(Errc::parse_error, "bad dimension in binary solution");
  for (std::uint32_t i = 0; i < n; ++i) b.dims.push_back(detail::take<std::uint32_t>(is));
  for (std::uint32_t i = 0; i < n; ++i) b.origin.push_back(detail::take<double>(is));
  b.h = detail::take<double>(is);
  b.tau = detail::take<double>(is);
  const auto levels = detail::take<std::uint64_t>(is);
  const auto nodes = detail::take<std::uint64_t>(is);
  std::uint64_t expect = 1;
  for (auto d : b.dims) expect *= d;
  if (expect != nodes) throw LabError(Errc::parse_error, "node count does not match dims");
  for (std::uint64_t l = 0; l < levels; ++l) b.times.push_back(detail::take<double>(is));
  b.values.assign(levels, std::vector<double>(nodes));
  for (auto& level : b.values)
    for (auto& v : level) v = detail::take<double>(is);
  return b;
}

}  // namespace pqlab
