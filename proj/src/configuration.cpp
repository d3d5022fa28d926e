#include "permuta/configuration.hpp"

#include <bit>

#include "permuta/errors.hpp"

namespace permuta {

Configuration::Configuration(const Lattice& lattice)
    : lattice_(lattice), n_(lattice.size()), words_((n_ + 63) / 64, 0) {}

Configuration Configuration::from_code(const Lattice& lattice, std::uint64_t code) {
  Configuration c(lattice);
  if (c.n_ > 64) throw Error(ErrorKind::Precondition, "codes address at most 64 sites");
  if (c.n_ < 64 && (code >> c.n_) != 0) throw Error(ErrorKind::Precondition, "code has bits beyond the torus");
  c.words_[0] = code;
  return c;
}

Configuration Configuration::from_bits(const Lattice& lattice, const std::string& bits) {
  Configuration c(lattice);
  if (bits.size() != c.n_) throw Error(ErrorKind::Precondition, "bit string length must equal the site count");
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw Error(ErrorKind::Parse, "bit strings contain only 0 and 1");
    c.set(i, bits[i] == '1');
  }
  return c;
}

std::size_t Configuration::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::uint64_t Configuration::code() const {
  if (n_ > 64) throw Error(ErrorKind::Precondition, "codes address at most 64 sites");
  return words_.empty() ? 0 : words_[0];
}

std::vector<Site> Configuration::occupied() const {
  std::vector<Site> out;
  for (std::size_t i = 0; i < n_; ++i)
    if (get(i)) out.push_back(lattice_.site_at(i));
  return out;
}

std::string Configuration::to_bits() const {
  std::string s(n_, '0');
  for (std::size_t i = 0; i < n_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

}  // namespace permuta
