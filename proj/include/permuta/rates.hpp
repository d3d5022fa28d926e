#ifndef PERMUTA_RATES_HPP
#define PERMUTA_RATES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "permuta/lattice.hpp"
#include "permuta/permutation.hpp"

namespace permuta {

struct BasePermutation {
  FinitePermutation perm;
  double rate = 0.0;
};

/// Shift-invariant rates: q(σ + y) = q(σ) for every base permutation σ and
/// every lattice shift y. Base permutations are anchored so that the minimal
/// site of their range is the origin.
class RateFamily {
 public:
  RateFamily(Lattice lattice, std::vector<BasePermutation> base);

  const Lattice& lattice() const { return lattice_; }
  const std::vector<BasePermutation>& base() const { return base_; }
  bool empty() const { return base_.empty(); }

  /// Same base family on another lattice (re-checks the torus constraint).
  RateFamily on(const Lattice& lattice) const { return RateFamily(lattice, base_); }

  /// Index of the base permutation equal to sigma after anchoring, if any.
  std::optional<std::size_t> find(const FinitePermutation& sigma) const;

  /// Per-coordinate maximum extent of any base range.
  Site max_extent() const;

 private:
  Lattice lattice_;
  std::vector<BasePermutation> base_;
};

/// Translate sigma so the minimal site of its range is the origin.
FinitePermutation anchor(const FinitePermutation& sigma);

/// One shift of one base permutation on a torus, precompiled to site indices.
struct ExpandedPermutation {
  FinitePermutation perm;
  double rate = 0.0;
  std::size_t base = 0;
  Site shift;
  /// Occupancy moves from site index from[j] to site index to[j].
  std::vector<std::uint32_t> from;
  std::vector<std::uint32_t> to;
};

std::vector<ExpandedPermutation> expand(const RateFamily& fam);

double compute_M_PL(const RateFamily& fam);
int compute_M_I(const RateFamily& fam);
/// Max over range sets of (max rate / min rate); requires strict closure.
double compute_M_II(const RateFamily& fam);

bool check_symmetry(const RateFamily& fam);

enum class ClosureMode { Strict, Relaxed };

struct ClosureReport {
  ClosureMode mode = ClosureMode::Strict;
  bool pass = false;
  /// Human-readable witness of the first failure; empty on success.
  std::string detail;
};

ClosureReport check_range_closure(const RateFamily& fam, ClosureMode mode);
bool check_irreducibility(const RateFamily& fam);

struct RangeStat {
  double m = 0.0;  // minimal rate among permutations with this exact range
  double Z = 0.0;  // total rate
  std::size_t count = 0;
};

/// On a torus: grouped over the expansion. On the unbounded lattice: one
/// entry per anchored base range (every shift has the same statistics).
std::map<RangeSet, RangeStat> range_stats(const RateFamily& fam);

/// Σ Z(R) over range sets containing both u and v.
double z_d(const RateFamily& fam, const Site& u, const Site& v);

struct FamilyReport {
  double M_PL = 0.0;
  int M_I = 0;
  std::optional<double> M_II;
  bool symmetric = false;
  bool range_closed = false;
  bool range_closed_relaxed = false;
  bool irreducible = false;
  /// m(R)·M_II·𝒫(M_I) ≥ Z(R) for every range set (only meaningful with M_II).
  bool success_bound_consistent = false;
};

FamilyReport report(const RateFamily& fam);

/// Gate for the simulation engines: nonempty and irreducible.
void require_simulatable(const RateFamily& fam);

// --- range groups used by the coupling engines -------------------------------

struct GroupMember {
  std::size_t expanded = 0;  // index into expand(fam)
  PositionPerm local;
  double rate = 0.0;
};

/// All expanded permutations sharing one exact range. Positions follow the
/// anchored base range, so orderings on R and on R + y agree.
struct RangeGroup {
  std::vector<Site> base_range;
  Site shift;
  std::vector<std::uint32_t> site_index;  // torus index of each position
  std::vector<GroupMember> members;
  double m = 0.0;
  double Z = 0.0;

  std::optional<std::size_t> member_with(const PositionPerm& p) const;
};

std::vector<RangeGroup> range_groups(const RateFamily& fam, const std::vector<ExpandedPermutation>& expanded);

}  // namespace permuta

#endif  // PERMUTA_RATES_HPP
