#ifndef PERMUTA_PERMUTATION_HPP
#define PERMUTA_PERMUTATION_HPP

#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "permuta/configuration.hpp"
#include "permuta/lattice.hpp"

namespace permuta {

/// A bijection of sites moving finitely many of them, kept as disjoint cycles.
/// Canonical form: every cycle has length >= 2 and starts at its minimal site,
/// cycles are sorted by that minimal site. The identity has no cycles.
class FinitePermutation {
 public:
  FinitePermutation() = default;
  explicit FinitePermutation(std::vector<std::vector<Site>> cycles);

  static FinitePermutation from_map(const std::map<Site, Site>& images);
  static FinitePermutation transposition(const Site& a, const Site& b);

  const std::vector<std::vector<Site>>& cycles() const { return cycles_; }
  bool is_identity() const { return cycles_.empty(); }
  /// A single cycle covering the whole range.
  bool is_cyclic() const { return cycles_.size() == 1; }

  Site operator()(const Site& x) const;
  Site preimage(const Site& x) const;
  bool moves(const Site& x) const;

  /// Range(σ) sorted canonically.
  std::vector<Site> range() const;
  std::size_t range_size() const;

  /// Image under a lattice shift; on a torus every site is wrapped.
  FinitePermutation shifted(const Site& v, const Lattice& lat) const;

  std::map<Site, Site> to_map() const;

  /// "(x1 x2 x3)(y1 y2)" with sites written as comma-separated coordinates.
  std::string to_string(int dim) const;
  static FinitePermutation parse(const std::string& text, int dim);

  auto operator<=>(const FinitePermutation&) const = default;
  bool operator==(const FinitePermutation&) const = default;

 private:
  std::vector<std::vector<Site>> cycles_;
};

/// Sorted set of at least two sites that is the range of some permutation.
class RangeSet {
 public:
  explicit RangeSet(std::vector<Site> sites);

  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  std::optional<std::size_t> position(const Site& x) const;
  bool contains(const Site& x) const { return position(x).has_value(); }

  auto operator<=>(const RangeSet&) const = default;
  bool operator==(const RangeSet&) const = default;

 private:
  std::vector<Site> sites_;
};

/// Occupancy of a range set: bit j is the occupancy of the j-th site.
using Word = std::uint32_t;

/// Permutation of the positions 0..k-1 of a range set: p[j] is the position
/// that position j is sent to.
using PositionPerm = std::vector<std::uint8_t>;

// --- group operations -------------------------------------------------------

/// σ(η)(x) = η(σ⁻¹(x)).
Configuration apply(const FinitePermutation& sigma, const Configuration& eta);
/// Image of a finite site set.
std::vector<Site> apply(const FinitePermutation& sigma, const std::vector<Site>& set);

FinitePermutation inverse(const FinitePermutation& sigma);
/// (σ₁∘σ₂)(x) = σ₁(σ₂(x)); applying the composition equals applying σ₂ first.
FinitePermutation compose(const FinitePermutation& first_applied_last, const FinitePermutation& second);
FinitePermutation power(const FinitePermutation& sigma, long exponent);
/// [x, σ(x), σ²(x), ...] up to the return to x.
std::vector<Site> orbit(const FinitePermutation& sigma, const Site& x);

// --- derangements -----------------------------------------------------------

std::uint64_t derangement_count_inclusion_exclusion(int n);
std::uint64_t derangement_count_recurrence(int n);
/// Number of fixed-point-free permutations of n >= 2 elements.
std::uint64_t derangement_count(int n);

// --- permutations with a given range ---------------------------------------

/// All (k-1)! single cycles on positions 0..k-1, ordered lexicographically by
/// the cycle sequence read from position 0.
const std::vector<PositionPerm>& cyclic_position_perms(std::size_t k);
std::vector<PositionPerm> derangement_position_perms(std::size_t k);

Word apply_word(const PositionPerm& p, Word a);
PositionPerm compose_positions(const PositionPerm& outer, const PositionPerm& inner);
PositionPerm power_positions(const PositionPerm& p, long exponent);
PositionPerm identity_positions(std::size_t k);
bool is_identity(const PositionPerm& p);

FinitePermutation to_permutation(const PositionPerm& p, const std::vector<Site>& sites_by_position);
PositionPerm to_positions(const FinitePermutation& sigma, const RangeSet& r);

std::vector<FinitePermutation> enumerate_cyclic(const RangeSet& r);
std::vector<FinitePermutation> enumerate_derangements(const RangeSet& r);

// --- σ_R selection ----------------------------------------------------------

/// Which admissible cycle wins when several qualify. CanonicalFirst reads
/// "pick the first one"; CanonicalLast reads "the one of highest order".
enum class SelectionPolicy { CanonicalFirst, CanonicalLast };

/// Index into cyclic_position_perms(k) of the selected cycle with
/// σ(a) ≥ b pointwise, or nullopt. `allowed` filters candidates.
std::optional<std::size_t> select_cover_index(std::size_t k, Word a, Word b, SelectionPolicy policy,
                                              const std::function<bool(std::size_t)>& allowed = {});

/// Cyclic σ on R with σ(a) = b; a and b must have equal popcount and differ
/// in exactly two positions.
FinitePermutation select_sigma_two_discrepancy(const RangeSet& r, Word a, Word b,
                                               SelectionPolicy policy = SelectionPolicy::CanonicalFirst);

/// Cyclic σ on R with σ(a) ≥ b on R; requires popcount(a) >= popcount(b).
FinitePermutation select_sigma_general(const RangeSet& r, Word a, Word b,
                                       SelectionPolicy policy = SelectionPolicy::CanonicalFirst);

inline int popcount(Word w) { return std::popcount(w); }

}  // namespace permuta

#endif  // PERMUTA_PERMUTATION_HPP
