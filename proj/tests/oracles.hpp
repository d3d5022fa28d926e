#ifndef PERMUTA_TESTS_ORACLES_HPP
#define PERMUTA_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "permuta/configuration.hpp"
#include "permuta/exact.hpp"
#include "permuta/permutation.hpp"
#include "permuta/rates.hpp"

namespace testsupport {

using namespace permuta;

/// Dense e^{tQ} by scaling and squaring of a Taylor series: an oracle that
/// shares nothing with the uniformization code.
inline std::vector<std::vector<double>> dense_expm(const GeneratorMatrix& Q, double t) {
  const std::size_t n = Q.states();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) A[i][j] = Q.entry(i, j) * t;
  double norm = 0.0;
  for (const auto& row : A) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  while (norm > 0.25) {
    norm /= 2;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& row : A)
    for (double& v : row) v *= scale;
  auto mul = [n](const auto& X, const auto& Y) {
    std::vector<std::vector<double>> Z(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (X[i][k] != 0.0)
          for (std::size_t j = 0; j < n; ++j) Z[i][j] += X[i][k] * Y[k][j];
    return Z;
  };
  std::vector<std::vector<double>> E(n, std::vector<double>(n, 0.0)), term(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) E[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 20; ++k) {
    term = mul(term, A);
    for (auto& row : term)
      for (double& v : row) v /= k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) E[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) E = mul(E, E);
  return E;
}

/// Off-diagonal generator rows built state by state from permuta::apply on
/// every shift of every base permutation. Shares no code with the CSR builder.
inline std::vector<std::map<std::uint64_t, double>> oracle_generator(const RateFamily& fam) {
  const auto& lat = fam.lattice();
  const std::size_t n = lat.size();
  std::vector<FinitePermutation> placed;
  std::vector<double> rates;
  for (const auto& b : fam.base())
    for (const auto& y : lat.sites()) {
      placed.push_back(b.perm.shifted(y, lat));
      rates.push_back(b.rate);
    }
  std::vector<std::map<std::uint64_t, double>> rows(std::size_t{1} << n);
  for (std::uint64_t code = 0; code < rows.size(); ++code) {
    const auto eta = Configuration::from_code(lat, code);
    for (std::size_t i = 0; i < placed.size(); ++i) {
      const auto to = permuta::apply(placed[i], eta).code();
      if (to != code) rows[code][to] += rates[i];
    }
  }
  return rows;
}

}  // namespace testsupport

#endif  // PERMUTA_TESTS_ORACLES_HPP
