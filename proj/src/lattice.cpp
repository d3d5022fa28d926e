#include "permuta/lattice.hpp"

#include <sstream>

#include "permuta/errors.hpp"

namespace permuta {

Site::Site(std::initializer_list<std::int64_t> coords) {
  if (coords.size() > 3) throw Error(ErrorKind::Precondition, "sites have at most 3 coordinates");
  std::size_t i = 0;
  for (auto v : coords) c[i++] = v;
}

Site operator+(const Site& a, const Site& b) {
  Site r;
  for (std::size_t i = 0; i < 3; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

Site operator-(const Site& a, const Site& b) {
  Site r;
  for (std::size_t i = 0; i < 3; ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}

Site Site::operator-() const {
  Site r;
  for (std::size_t i = 0; i < 3; ++i) r.c[i] = -c[i];
  return r;
}

std::string Site::to_string(int dim) const {
  std::ostringstream os;
  for (int i = 0; i < dim; ++i) {
    if (i) os << ',';
    os << c[static_cast<std::size_t>(i)];
  }
  return os.str();
}

Lattice Lattice::torus(const std::vector<std::int64_t>& sides) {
  if (sides.empty() || sides.size() > 3)
    throw Error(ErrorKind::Precondition, "torus dimension must be 1, 2 or 3");
  std::array<std::int64_t, 3> s{1, 1, 1};
  for (std::size_t i = 0; i < sides.size(); ++i) {
    if (sides[i] < 2) throw Error(ErrorKind::Precondition, "torus sides must be >= 2");
    s[i] = sides[i];
  }
  return Lattice(Mode::Torus, static_cast<int>(sides.size()), s);
}

Lattice Lattice::unbounded(int dim) {
  if (dim < 1 || dim > 3) throw Error(ErrorKind::Precondition, "dimension must be 1, 2 or 3");
  return Lattice(Mode::Unbounded, dim, {1, 1, 1});
}

std::vector<std::int64_t> Lattice::sides() const {
  if (!is_torus()) return {};
  return {sides_.begin(), sides_.begin() + dim_};
}

std::size_t Lattice::size() const {
  if (!is_torus()) throw Error(ErrorKind::Precondition, "unbounded lattice has no finite site count");
  std::size_t n = 1;
  for (int i = 0; i < dim_; ++i) n *= static_cast<std::size_t>(sides_[static_cast<std::size_t>(i)]);
  return n;
}

Site Lattice::wrap(const Site& x) const {
  if (!is_torus()) return x;
  Site r = x;
  for (std::size_t i = 0; i < static_cast<std::size_t>(dim_); ++i) {
    const auto L = sides_[i];
    r.c[i] = ((x.c[i] % L) + L) % L;
  }
  return r;
}

bool Lattice::contains(const Site& x) const {
  for (std::size_t i = static_cast<std::size_t>(dim_); i < 3; ++i)
    if (x.c[i] != 0) return false;
  if (!is_torus()) return true;
  for (std::size_t i = 0; i < static_cast<std::size_t>(dim_); ++i)
    if (x.c[i] < 0 || x.c[i] >= sides_[i]) return false;
  return true;
}

std::vector<Site> Lattice::sites() const {
  if (!is_torus()) throw Error(ErrorKind::Precondition, "cannot enumerate sites of an unbounded lattice");
  std::vector<Site> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) out.push_back(site_at(k));
  return out;
}

std::size_t Lattice::index(const Site& x) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(dim_); ++i)
    idx = idx * static_cast<std::size_t>(sides_[i]) + static_cast<std::size_t>(x.c[i]);
  return idx;
}

Site Lattice::site_at(std::size_t index) const {
  Site x;
  for (int i = dim_ - 1; i >= 0; --i) {
    const auto L = static_cast<std::size_t>(sides_[static_cast<std::size_t>(i)]);
    x.c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(index % L);
    index /= L;
  }
  return x;
}

std::string Lattice::describe() const {
  std::ostringstream os;
  if (!is_torus()) {
    os << "unbounded(d=" << dim_ << ")";
    return os.str();
  }
  os << "torus(";
  for (int i = 0; i < dim_; ++i) os << (i ? "x" : "") << sides_[static_cast<std::size_t>(i)];
  os << ")";
  return os.str();
}

}  // namespace permuta
