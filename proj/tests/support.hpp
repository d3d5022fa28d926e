#ifndef PERMUTA_TESTS_SUPPORT_HPP
#define PERMUTA_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "permuta/rates.hpp"

namespace testsupport {

using namespace permuta;

inline FinitePermutation cycle1(std::initializer_list<std::int64_t> xs) {
  std::vector<Site> c;
  for (auto x : xs) c.push_back(Site{x});
  return FinitePermutation({c});
}

/// The two 3-cycles on consecutive sites, both at rate q.
inline RateFamily three_cycle(std::int64_t L, double q = 1.0, double q_inverse = -1.0) {
  const Lattice lat = L > 0 ? Lattice::torus({L}) : Lattice::unbounded(1);
  return RateFamily(lat, {{cycle1({0, 1, 2}), q}, {cycle1({0, 2, 1}), q_inverse > 0 ? q_inverse : q}});
}

inline RateFamily single_three_cycle(std::int64_t L, double q = 1.0) {
  return RateFamily(Lattice::torus({L}), {{cycle1({0, 1, 2}), q}});
}

inline RateFamily transposition(std::int64_t L, double q = 1.0, std::int64_t span = 1) {
  const Lattice lat = L > 0 ? Lattice::torus({L}) : Lattice::unbounded(1);
  return RateFamily(lat, {{FinitePermutation::transposition(Site{0}, Site{span}), q}});
}

/// Nearest-neighbour transpositions along every axis of Z^d.
inline RateFamily nn_transpositions(int d, std::int64_t L = 0, double q = 1.0) {
  std::vector<BasePermutation> base;
  for (int i = 0; i < d; ++i) {
    Site e;
    e[static_cast<std::size_t>(i)] = 1;
    base.push_back({FinitePermutation::transposition(Site{}, e), q});
  }
  return RateFamily(L > 0 ? Lattice::torus(std::vector<std::int64_t>(static_cast<std::size_t>(d), L))
                          : Lattice::unbounded(d),
                    base);
}

/// Brute-force count of fixed-point-free permutations of n elements.
inline std::uint64_t brute_derangements(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (int i = 0; i < n; ++i) ok = ok && p[static_cast<std::size_t>(i)] != i;
    count += ok;
  } while (std::next_permutation(p.begin(), p.end()));
  return count;
}

/// Two-sample z statistic for Poisson counts observed over equal exposure.
inline double poisson_z(double a, double b) {
  if (a + b == 0.0) return 0.0;
  return (a - b) / std::sqrt(a + b);
}

}  // namespace testsupport

#endif  // PERMUTA_TESTS_SUPPORT_HPP
