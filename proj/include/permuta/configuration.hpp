#ifndef PERMUTA_CONFIGURATION_HPP
#define PERMUTA_CONFIGURATION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "permuta/lattice.hpp"

namespace permuta {

/// Occupancy map on a torus, one bit per site in canonical order.
class Configuration {
 public:
  explicit Configuration(const Lattice& lattice);

  static Configuration from_code(const Lattice& lattice, std::uint64_t code);
  static Configuration from_bits(const Lattice& lattice, const std::string& bits);

  const Lattice& lattice() const { return lattice_; }
  std::size_t site_count() const { return n_; }

  bool get(std::size_t idx) const { return (words_[idx >> 6] >> (idx & 63)) & 1u; }
  void set(std::size_t idx, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (idx & 63);
    if (v)
      words_[idx >> 6] |= mask;
    else
      words_[idx >> 6] &= ~mask;
  }
  bool get(const Site& x) const { return get(lattice_.index(lattice_.wrap(x))); }
  void set(const Site& x, bool v) { set(lattice_.index(lattice_.wrap(x)), v); }

  std::size_t popcount() const;
  /// Bit word of the whole configuration; requires at most 64 sites.
  std::uint64_t code() const;
  std::vector<Site> occupied() const;
  std::string to_bits() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const Configuration& o) const { return n_ == o.n_ && words_ == o.words_; }

 private:
  Lattice lattice_;
  std::size_t n_;
  std::vector<std::uint64_t> words_;
};

}  // namespace permuta

#endif  // PERMUTA_CONFIGURATION_HPP
