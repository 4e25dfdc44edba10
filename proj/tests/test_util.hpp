#pragma once

#include <random>

#include "qgeom/core_states.hpp"

namespace testutil {

using namespace qgeom;

inline CVec random_vec(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> N;
  CVec v(m);
  for (int i = 0; i < m; ++i) v(i) = cplx(N(rng), N(rng));
  return v;
}

inline StateVector random_state(std::mt19937_64& rng, int m) { return normalize(random_vec(rng, m)); }

inline CMat random_unitary(std::mt19937_64& rng, int m) {
  CMat a(m, m);
  for (int j = 0; j < m; ++j) a.col(j) = random_vec(rng, m);
  return Eigen::HouseholderQR<CMat>(a).householderQ();
}

// Parameter x = index into a fixed list of states.
inline StateFamily table_family(const std::vector<StateVector>& s) {
  return StateFamily::from_vectors(1, s.front().proj_dim(),
                                   [s](const RVec& x) { return s[static_cast<size_t>(std::lround(x(0)))].amplitudes(); });
}

// 4-point central first derivative of a scalar function.
template <class F>
auto d1(F f, double x, double h) {
  using R = decltype(f(x));
  return R((f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h));
}

template <class E>
bool throws_kind(ErrorKind k, E&& expr) {
  try {
    expr();
  } catch (const Error& e) {
    return e.kind() == k;
  }
  return false;
}

}  // namespace testutil
