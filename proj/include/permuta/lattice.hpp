#ifndef PERMUTA_LATTICE_HPP
#define PERMUTA_LATTICE_HPP

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace permuta {

/// A point of Z^d, d <= 3. Unused trailing coordinates stay zero, so the
/// defaulted ordering is the lexicographic canonical site order.
struct Site {
  std::array<std::int64_t, 3> c{};

  Site() = default;
  Site(std::initializer_list<std::int64_t> coords);

  std::int64_t operator[](std::size_t i) const { return c[i]; }
  std::int64_t& operator[](std::size_t i) { return c[i]; }

  friend Site operator+(const Site& a, const Site& b);
  friend Site operator-(const Site& a, const Site& b);
  Site operator-() const;

  auto operator<=>(const Site&) const = default;
  bool operator==(const Site&) const = default;

  std::string to_string(int dim) const;
};

class Lattice {
 public:
  enum class Mode { Torus, Unbounded };

  static Lattice torus(const std::vector<std::int64_t>& sides);
  static Lattice unbounded(int dim);

  Mode mode() const { return mode_; }
  bool is_torus() const { return mode_ == Mode::Torus; }
  int dim() const { return dim_; }
  std::int64_t side(int i) const { return sides_[static_cast<std::size_t>(i)]; }
  std::vector<std::int64_t> sides() const;

  /// Number of sites; torus only.
  std::size_t size() const;

  Site wrap(const Site& x) const;
  Site shift(const Site& x, const Site& v) const { return wrap(x + v); }
  bool contains(const Site& x) const;

  /// All sites in canonical (lexicographic) order; rejects Unbounded.
  std::vector<Site> sites() const;
  /// Position of a wrapped site in the canonical order.
  std::size_t index(const Site& x) const;
  Site site_at(std::size_t index) const;

  bool operator==(const Lattice&) const = default;

  std::string describe() const;

 private:
  Lattice(Mode mode, int dim, std::array<std::int64_t, 3> sides)
      : mode_(mode), dim_(dim), sides_(sides) {}

  Mode mode_ = Mode::Unbounded;
  int dim_ = 1;
  std::array<std::int64_t, 3> sides_{1, 1, 1};
};

inline Site shift(const Site& x, const Site& v, const Lattice& lat) { return lat.shift(x, v); }

}  // namespace permuta

#endif  // PERMUTA_LATTICE_HPP
